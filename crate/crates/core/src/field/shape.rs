use std::fmt;
use std::str::FromStr;

use super::{GridSpec, ScalarField};
use crate::error::{Error, Result};

/// Initial decision region. The generated field is the signed distance to
/// the shape boundary, positive inside.
#[derive(Debug, Clone, PartialEq)]
pub enum InitShape {
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    /// Union of equal spheres centred on a regular lattice spanning the grid.
    /// `per_axis` spheres along each axis (`None` picks a dimension default),
    /// radius `radius_frac` times the smallest lattice period, and lattice
    /// shifted by `phase` periods on every axis.
    Lattice {
        per_axis: Option<usize>,
        radius_frac: f64,
        phase: f64,
    },
}

impl Default for InitShape {
    fn default() -> Self {
        InitShape::Lattice {
            per_axis: None,
            radius_frac: 0.3,
            phase: 0.0,
        }
    }
}

pub(crate) fn default_lattice_count(dim: usize) -> usize {
    match dim {
        1 => 8,
        2 => 6,
        3 => 4,
        _ => 3,
    }
}

pub fn init_shape(grid: &GridSpec, shape: &InitShape) -> Result<ScalarField> {
    let d = grid.dim();
    match shape {
        InitShape::Sphere { center, radius } => {
            check_len(center, d)?;
            if !(*radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidShape(format!(
                    "radius {radius} must be positive"
                )));
            }
            if !grid.contains(center) {
                return Err(Error::InvalidShape(
                    "sphere centre lies outside the grid".into(),
                ));
            }
            Ok(ScalarField::from_fn(grid.clone(), |x| {
                radius - dist(x, center)
            }))
        }
        InitShape::Box { min, max } => {
            check_len(min, d)?;
            check_len(max, d)?;
            if min
                .iter()
                .zip(max)
                .any(|(a, b)| a.is_nan() || b.is_nan() || a >= b)
            {
                return Err(Error::InvalidShape("box is degenerate".into()));
            }
            if !grid.contains(min) || !grid.contains(max) {
                return Err(Error::InvalidShape(
                    "box corners lie outside the grid".into(),
                ));
            }
            Ok(ScalarField::from_fn(grid.clone(), |x| {
                let mut outside = 0.0;
                let mut inside = f64::NEG_INFINITY;
                for a in 0..d {
                    let c = 0.5 * (min[a] + max[a]);
                    let q = (x[a] - c).abs() - 0.5 * (max[a] - min[a]);
                    outside += q.max(0.0).powi(2);
                    inside = inside.max(q);
                }
                -(outside.sqrt() + inside.min(0.0))
            }))
        }
        InitShape::Lattice {
            per_axis,
            radius_frac,
            phase,
        } => {
            let n = per_axis.unwrap_or_else(|| default_lattice_count(d));
            if n == 0 {
                return Err(Error::InvalidShape(
                    "lattice needs at least one sphere per axis".into(),
                ));
            }
            if !(*radius_frac > 0.0 && *radius_frac < 0.5) {
                return Err(Error::InvalidShape(format!(
                    "lattice radius fraction {radius_frac} must lie in (0, 0.5)"
                )));
            }
            if !phase.is_finite() {
                return Err(Error::InvalidShape("lattice phase must be finite".into()));
            }
            let centers: Vec<Vec<f64>> = (0..d)
                .map(|a| {
                    let (lo, hi) = grid.bounds()[a];
                    let period = (hi - lo) / n as f64;
                    let shift = (phase + 0.5).rem_euclid(1.0);
                    (0..n).map(|j| lo + (j as f64 + shift) * period).collect()
                })
                .collect();
            let period_min = (0..d)
                .map(|a| (grid.bounds()[a].1 - grid.bounds()[a].0) / n as f64)
                .fold(f64::INFINITY, f64::min);
            let radius = radius_frac * period_min;
            // The nearest point of a product lattice is the per-axis nearest
            // coordinate, and for disjoint spheres the union's signed
            // distance is set by the nearest centre.
            Ok(ScalarField::from_fn(grid.clone(), |x| {
                let sq: f64 = x
                    .iter()
                    .zip(&centers)
                    .map(|(&xa, cs)| {
                        cs.iter()
                            .map(|&c| (xa - c) * (xa - c))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum();
                radius - sq.sqrt()
            }))
        }
    }
}

fn check_len(v: &[f64], d: usize) -> Result<()> {
    if v.len() != d {
        return Err(Error::InvalidShape(format!(
            "shape has {} coordinates, grid has {d} axes",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidShape("non-finite coordinate".into()));
    }
    Ok(())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// `lattice:<n|auto>:<radius_frac>:<phase>`, `sphere:<c0,c1,..>:<r>`,
/// `box:<lo0,lo1,..>:<hi0,hi1,..>`.
impl fmt::Display for InitShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitShape::Sphere { center, radius } => write!(f, "sphere:{}:{}", join(center), radius),
            InitShape::Box { min, max } => write!(f, "box:{}:{}", join(min), join(max)),
            InitShape::Lattice {
                per_axis,
                radius_frac,
                phase,
            } => {
                let n = per_axis.map_or("auto".to_string(), |n| n.to_string());
                write!(f, "lattice:{n}:{radius_frac}:{phase}")
            }
        }
    }
}

impl FromStr for InitShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse initial shape '{s}'"));
        let nums = |t: &str| -> Result<Vec<f64>> {
            t.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["lattice"] => Ok(InitShape::default()),
            ["lattice", n, r, p] => Ok(InitShape::Lattice {
                per_axis: if *n == "auto" {
                    None
                } else {
                    Some(n.parse().map_err(|_| bad())?)
                },
                radius_frac: r.parse().map_err(|_| bad())?,
                phase: p.parse().map_err(|_| bad())?,
            }),
            ["sphere", c, r] => Ok(InitShape::Sphere {
                center: nums(c)?,
                radius: r.parse().map_err(|_| bad())?,
            }),
            ["box", lo, hi] => Ok(InitShape::Box {
                min: nums(lo)?,
                max: nums(hi)?,
            }),
            _ => Err(bad()),
        }
    }
}
