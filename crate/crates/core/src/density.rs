//! Class-conditional densities from Gaussian product-kernel KDE.
//!
//! Grid evaluation is exact: the product kernel factorizes per axis, so each
//! sample contributes an outer product of 1-D kernel rows. Duplicate samples
//! are merged into weights first (integer-valued data such as RGB pixels has
//! many repeats).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::data::{Label, LabeledDataset};
use crate::error::{ClassTag, Error, Result};
use crate::field::{integrate_values, GridSpec, ScalarField};
use crate::par::Execution;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum BandwidthRule {
    /// σ̂_a · m^(-1/(d+4)) per axis.
    #[default]
    Scott,
    /// Explicit per-axis bandwidths; a single value applies to every axis.
    Fixed(Vec<f64>),
}

/// `scott`, or comma-separated bandwidths.
impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthRule::Scott => f.write_str("scott"),
            BandwidthRule::Fixed(h) => {
                let parts: Vec<String> = h.iter().map(|v| v.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for BandwidthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("scott") {
            return Ok(BandwidthRule::Scott);
        }
        let h = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| Error::Config(format!("bad bandwidth '{s}'")))?;
        Ok(BandwidthRule::Fixed(h))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    dim: usize,
    samples: Vec<f64>,
    bandwidth: Vec<f64>,
}

impl KdeModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len() / self.dim
    }

    /// Density at a single point, evaluated directly.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let norm = self.normalizer();
        let sum: f64 = self
            .samples
            .chunks_exact(self.dim)
            .map(|s| {
                let q: f64 = s
                    .iter()
                    .zip(x)
                    .zip(&self.bandwidth)
                    .map(|((si, xi), h)| ((xi - si) / h).powi(2))
                    .sum();
                (-0.5 * q).exp()
            })
            .sum();
        sum * norm
    }

    fn normalizer(&self) -> f64 {
        let hprod: f64 = self.bandwidth.iter().product();
        1.0 / (self.sample_count() as f64 * hprod * (2.0 * PI).powf(self.dim as f64 / 2.0))
    }

    /// Unique samples with multiplicities, in sorted order.
    fn weighted_samples(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim;
        let mut order: Vec<usize> = (0..self.sample_count()).collect();
        let key = |i: usize| &self.samples[i * d..(i + 1) * d];
        order.sort_by(|&a, &b| {
            key(a)
                .iter()
                .zip(key(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut points: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for i in order {
            let p = key(i);
            let same = !weights.is_empty() && points[points.len() - d..] == *p;
            if same {
                *weights.last_mut().unwrap() += 1.0;
            } else {
                points.extend_from_slice(p);
                weights.push(1.0);
            }
        }
        (points, weights)
    }
}

/// Fits a KDE to flat row-major `samples` of dimension `dim`.
pub fn fit_kde(samples: &[f64], dim: usize, rule: &BandwidthRule) -> Result<KdeModel> {
    if dim == 0 || !samples.len().is_multiple_of(dim) {
        return Err(Error::DegenerateData(
            "sample buffer does not match dimension".into(),
        ));
    }
    let m = samples.len() / dim;
    if m < 2 {
        return Err(Error::DegenerateData(format!(
            "{m} samples, at least 2 required"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("non-finite sample".into()));
    }
    let bandwidth = match rule {
        BandwidthRule::Fixed(h) => {
            let h = match h.len() {
                1 => vec![h[0]; dim],
                n if n == dim => h.clone(),
                n => {
                    return Err(Error::Config(format!(
                        "{n} bandwidths given for {dim} features"
                    )))
                }
            };
            if h.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
                return Err(Error::Config("bandwidths must be positive".into()));
            }
            h
        }
        BandwidthRule::Scott => {
            let factor = (m as f64).powf(-1.0 / (dim as f64 + 4.0));
            (0..dim)
                .map(|a| {
                    let sd = sample_sd(samples.iter().skip(a).step_by(dim).copied(), m);
                    if sd > 0.0 {
                        Ok(sd * factor)
                    } else {
                        Err(Error::DegenerateData(format!(
                            "feature {a} has zero variance"
                        )))
                    }
                })
                .collect::<Result<Vec<f64>>>()?
        }
    };
    Ok(KdeModel {
        dim,
        samples: samples.to_vec(),
        bandwidth,
    })
}

fn sample_sd(xs: impl Iterator<Item = f64> + Clone, m: usize) -> f64 {
    let mean = xs.clone().sum::<f64>() / m as f64;
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    (ss / (m as f64 - 1.0)).sqrt()
}

/// KDE sampled at every node of `grid`, rescaled to integrate to one.
pub fn density_on_grid(model: &KdeModel, grid: &GridSpec) -> Result<ScalarField> {
    density_on_grid_with(model, grid, Execution::default())
}

pub fn density_on_grid_with(
    model: &KdeModel,
    grid: &GridSpec,
    exec: Execution,
) -> Result<ScalarField> {
    let d = grid.dim();
    if d != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: d,
        });
    }
    let (points, weights) = model.weighted_samples();
    let m = weights.len();
    // tables[a][s * n_a + i] = exp(-((x_i - s_a) / h_a)^2 / 2)
    let tables: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            let n = grid.nodes(a);
            let h = model.bandwidth[a];
            let coords: Vec<f64> = (0..n).map(|i| grid.coord(a, i)).collect();
            let mut t = Vec::with_capacity(m * n);
            for s in 0..m {
                let c = points[s * d + a];
                t.extend(coords.iter().map(|&x| {
                    let z = (x - c) / h;
                    (-0.5 * z * z).exp()
                }));
            }
            t
        })
        .collect();

    let n0 = grid.nodes(0);
    let slab = grid.node_count() / n0;
    let rest_nodes: Vec<usize> = (1..d).map(|a| grid.nodes(a)).collect();
    let mut values = vec![0.0; grid.node_count()];
    exec.for_each_chunk(&mut values, slab, |i0, out| {
        let mut rows: Vec<&[f64]> = Vec::with_capacity(d - 1);
        for s in 0..m {
            let w = weights[s] * tables[0][s * n0 + i0];
            if w == 0.0 {
                continue;
            }
            rows.clear();
            for (a, &n) in rest_nodes.iter().enumerate() {
                rows.push(&tables[a + 1][s * n..(s + 1) * n]);
            }
            accumulate_outer(out, w, &rows);
        }
    });

    let norm = model.normalizer();
    for v in &mut values {
        *v *= norm;
    }
    let mass = integrate_values(grid, &values, exec);
    if mass.is_nan() || mass < 1e-12 {
        return Err(Error::EmptyMass(mass));
    }
    for v in &mut values {
        *v /= mass;
    }
    ScalarField::new(grid.clone(), values)
}

/// out += scale * (rows[0] ⊗ rows[1] ⊗ ...), row-major.
fn accumulate_outer(out: &mut [f64], scale: f64, rows: &[&[f64]]) {
    match rows {
        [] => out[0] += scale,
        [last] => {
            for (o, &k) in out.iter_mut().zip(*last) {
                *o += scale * k;
            }
        }
        [first, rest @ ..] => {
            let stride = out.len() / first.len();
            for (chunk, &k) in out.chunks_exact_mut(stride).zip(*first) {
                let w = scale * k;
                if w != 0.0 {
                    accumulate_outer(chunk, w, rest);
                }
            }
        }
    }
}

/// Grid densities of both classes with the class counts they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPair {
    pub f_pos: ScalarField,
    pub f_neg: ScalarField,
    pub p_count: usize,
    pub n_count: usize,
}

impl DensityPair {
    pub fn new(
        f_pos: ScalarField,
        f_neg: ScalarField,
        p_count: usize,
        n_count: usize,
    ) -> Result<Self> {
        f_pos.same_grid(&f_neg)?;
        if p_count == 0 || n_count == 0 {
            return Err(Error::DegenerateData(
                "class counts must be positive".into(),
            ));
        }
        if f_pos
            .values()
            .iter()
            .chain(f_neg.values())
            .any(|&v| v < 0.0)
        {
            return Err(Error::DegenerateData(
                "densities must be nonnegative".into(),
            ));
        }
        Ok(DensityPair {
            f_pos,
            f_neg,
            p_count,
            n_count,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.f_pos.grid()
    }
}

pub fn estimate_pair(
    data: &LabeledDataset,
    grid: &GridSpec,
    rule: &BandwidthRule,
) -> Result<DensityPair> {
    estimate_pair_with(data, grid, rule, Execution::default())
}

pub fn estimate_pair_with(
    data: &LabeledDataset,
    grid: &GridSpec,
    rule: &BandwidthRule,
    exec: Execution,
) -> Result<DensityPair> {
    let one = |label: Label, tag: ClassTag| -> Result<ScalarField> {
        let pts = data.class_points(label);
        let model = fit_kde(&pts, data.dim(), rule).map_err(|e| e.tagged(tag))?;
        density_on_grid_with(&model, grid, exec).map_err(|e| e.tagged(tag))
    };
    let f_pos = one(Label::Positive, ClassTag::Positive)?;
    let f_neg = one(Label::Negative, ClassTag::Negative)?;
    DensityPair::new(f_pos, f_neg, data.p_count(), data.n_count())
}
