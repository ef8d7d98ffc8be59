//! Region energies over a level-set function and their functional derivatives.
//!
//! For the F-beta measure with k = β²P/N:
//!
//! ```text
//! E[u]  = (k·∫H(−u)f₊ + ∫H(u)f₋) / ∫H(u)f₊
//! E'[u] = δ(u)·(f₋ − (k + E)·f₊) / ∫H(u)f₊
//! ```
//!
//! Minimizing E maximizes F_β. The accuracy energy is the expected number of
//! misclassified samples, whose minimizer is the Bayes rule P·f₊ = N·f₋.
//!
//! With trapezoid quadrature the discrete energy is a smooth function of the
//! node values and ∂E/∂u_i = w_i·E'_i exactly, so [`MeasureEnergy::gradient`]
//! is the gradient with respect to the quadrature inner product.

use std::fmt;
use std::str::FromStr;

use crate::density::DensityPair;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::heaviside::{dirac, heaviside_pair};
use crate::par::Execution;

/// Positive-mass floor below which the F-beta energy is undefined.
pub const MIN_POSITIVE_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    FBeta { beta: f64 },
    Accuracy,
}

impl Measure {
    pub fn f1() -> Self {
        Measure::FBeta { beta: 1.0 }
    }

    /// β for F-beta; accuracy reports 1 so metric tables stay uniform.
    pub fn beta(&self) -> f64 {
        match self {
            Measure::FBeta { beta } => *beta,
            Measure::Accuracy => 1.0,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::FBeta { beta } => write!(f, "f-beta:{beta}"),
            Measure::Accuracy => f.write_str("accuracy"),
        }
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "accuracy" {
            return Ok(Measure::Accuracy);
        }
        let beta = match s {
            "f-beta" | "fbeta" | "f1" => 1.0,
            _ => s
                .strip_prefix("f-beta:")
                .or_else(|| s.strip_prefix("fbeta:"))
                .and_then(|b| b.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("unknown measure '{s}'")))?,
        };
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("beta must be positive, got {beta}")));
        }
        Ok(Measure::FBeta { beta })
    }
}

/// Which direction the flow follows for the F-beta energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Descent {
    /// E'[u] as derived, with k = β²P/N.
    #[default]
    Derivative,
    /// δ(u)·[(f₋ − β²f₊)·D − f₊·(∫H(u)f₋ + β²∫H(−u)f₊)], i.e. E'·D² with β²
    /// in place of k. Same zero set when P = N. Accuracy ignores this switch.
    G,
}

impl fmt::Display for Descent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Descent::Derivative => "derivative",
            Descent::G => "G",
        })
    }
}

impl FromStr for Descent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "derivative" => Ok(Descent::Derivative),
            "G" | "g" => Ok(Descent::G),
            other => Err(Error::Config(format!("unknown descent '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureEnergy {
    measure: Measure,
    k: f64,
    p: f64,
    n: f64,
}

impl MeasureEnergy {
    pub fn new(measure: Measure, d: &DensityPair) -> Result<Self> {
        Self::from_counts(measure, d.p_count, d.n_count)
    }

    pub fn from_counts(measure: Measure, p_count: usize, n_count: usize) -> Result<Self> {
        if p_count == 0 || n_count == 0 {
            return Err(Error::DegenerateData(
                "class counts must be positive".into(),
            ));
        }
        let (p, n) = (p_count as f64, n_count as f64);
        let k = match measure {
            Measure::FBeta { beta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::Config(format!("beta must be positive, got {beta}")));
                }
                beta * beta * p / n
            }
            Measure::Accuracy => 0.0,
        };
        Ok(MeasureEnergy { measure, k, p, n })
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn p_count(&self) -> usize {
        self.p as usize
    }

    pub fn n_count(&self) -> usize {
        self.n as usize
    }

    pub fn evaluate(&self, u: &ScalarField, d: &DensityPair, eps_h: f64) -> Result<f64> {
        let kernel = Kernel::new(*self, d, eps_h, Execution::default());
        u.same_grid(&d.f_pos)?;
        kernel.energy(&kernel.integrals(u.values()))
    }

    pub fn gradient(&self, u: &ScalarField, d: &DensityPair, eps_h: f64) -> Result<ScalarField> {
        self.direction(u, d, eps_h, Descent::Derivative)
    }

    /// Node-wise descent direction of the chosen kind.
    pub fn direction(
        &self,
        u: &ScalarField,
        d: &DensityPair,
        eps_h: f64,
        descent: Descent,
    ) -> Result<ScalarField> {
        u.same_grid(&d.f_pos)?;
        let kernel = Kernel::new(*self, d, eps_h, Execution::default());
        let sums = kernel.integrals(u.values());
        let e = kernel.energy(&sums)?;
        let mut out = vec![0.0; u.values().len()];
        kernel.direction(u.values(), &sums, e, descent, &mut out);
        ScalarField::new(u.grid().clone(), out)
    }

    /// Max |E'| over the nodes where δ(u) exceeds 1e-3 of its maximum.
    pub fn stationarity_residual(
        &self,
        u: &ScalarField,
        d: &DensityPair,
        eps_h: f64,
    ) -> Result<f64> {
        let g = self.gradient(u, d, eps_h)?;
        let min_abs = u.values().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let cutoff = 1e-3 * dirac(min_abs, eps_h);
        Ok(u.values()
            .iter()
            .zip(g.values())
            .filter(|(v, _)| dirac(**v, eps_h) > cutoff)
            .fold(0.0, |m, (_, gi)| m.max(gi.abs())))
    }
}

/// Smoothed region integrals of the normalized densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RegionSums {
    /// ∫H(u)f₊
    pub pos_in: f64,
    /// ∫H(−u)f₊
    pub pos_out: f64,
    /// ∫H(u)f₋
    pub neg_in: f64,
}

/// Energy evaluation bound to one density pair, with cached quadrature weights.
pub(crate) struct Kernel<'a> {
    energy: MeasureEnergy,
    f_pos: &'a [f64],
    f_neg: &'a [f64],
    weights: Vec<f64>,
    eps: f64,
    exec: Execution,
}

impl<'a> Kernel<'a> {
    pub fn new(energy: MeasureEnergy, d: &'a DensityPair, eps: f64, exec: Execution) -> Self {
        Kernel {
            energy,
            f_pos: d.f_pos.values(),
            f_neg: d.f_neg.values(),
            weights: d.grid().quadrature_weights(),
            eps,
            exec,
        }
    }

    pub fn integrals(&self, u: &[f64]) -> RegionSums {
        let (w, fp, fm, eps) = (&self.weights, self.f_pos, self.f_neg, self.eps);
        let [pos_in, pos_out, neg_in] = self.exec.sum_n(u.len(), |k| {
            let (hi, ho) = heaviside_pair(u[k], eps);
            [w[k] * hi * fp[k], w[k] * ho * fp[k], w[k] * hi * fm[k]]
        });
        RegionSums {
            pos_in,
            pos_out,
            neg_in,
        }
    }

    pub fn energy(&self, s: &RegionSums) -> Result<f64> {
        let e = &self.energy;
        match e.measure {
            Measure::FBeta { .. } => {
                if s.pos_in.is_nan() || s.pos_in <= MIN_POSITIVE_MASS {
                    return Err(Error::VanishingPositiveMass);
                }
                Ok((e.k * s.pos_out + s.neg_in) / s.pos_in)
            }
            Measure::Accuracy => Ok(e.p * s.pos_out + e.n * s.neg_in),
        }
    }

    /// Writes the descent direction at every node into `out`.
    pub fn direction(&self, u: &[f64], s: &RegionSums, e: f64, descent: Descent, out: &mut [f64]) {
        let (fp, fm, eps) = (self.f_pos, self.f_neg, self.eps);
        let en = &self.energy;
        match (en.measure, descent) {
            (Measure::FBeta { .. }, Descent::Derivative) => {
                let c = en.k + e;
                let inv_d = 1.0 / s.pos_in;
                self.exec
                    .fill(out, |i| dirac(u[i], eps) * (fm[i] - c * fp[i]) * inv_d);
            }
            (Measure::FBeta { beta }, Descent::G) => {
                let b2 = beta * beta;
                let tail = s.neg_in + b2 * s.pos_out;
                let dm = s.pos_in;
                self.exec.fill(out, |i| {
                    dirac(u[i], eps) * ((fm[i] - b2 * fp[i]) * dm - fp[i] * tail)
                });
            }
            (Measure::Accuracy, _) => {
                let (p, n) = (en.p, en.n);
                self.exec
                    .fill(out, |i| dirac(u[i], eps) * (n * fm[i] - p * fp[i]));
            }
        }
    }
}
