//! Brute-force decision threshold for 1-D problems.
//!
//! The positive class is predicted on one side of τ (`x ≥ τ` when positives
//! lie above negatives on average, `x ≤ τ` otherwise). τ runs over `steps`
//! equally spaced values and the first best value wins, so ties go to the
//! smaller threshold.

use statrs::function::erf::erfc;

use crate::data::{Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::{metrics_from_counts, ConfusionCounts, MetricsReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    FBeta(f64),
    Accuracy,
}

impl Objective {
    fn beta(self) -> f64 {
        match self {
            Objective::FBeta(b) => b,
            Objective::Accuracy => 1.0,
        }
    }

    fn score(self, m: &MetricsReport) -> f64 {
        match self {
            Objective::FBeta(_) => m.f_beta,
            Objective::Accuracy => m.accuracy,
        }
    }
}

/// Two Gaussian classes with known parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToySpec {
    pub pos_mean: f64,
    pub pos_sd: f64,
    pub neg_mean: f64,
    pub neg_sd: f64,
    pub p_count: usize,
    pub n_count: usize,
}

impl ToySpec {
    /// Population behind [`crate::data::gen_toy1d`].
    pub fn standard() -> Self {
        ToySpec {
            pos_mean: 3.0,
            pos_sd: 1.0,
            neg_mean: 1.0,
            neg_sd: 1.0,
            p_count: 1000,
            n_count: 50000,
        }
    }

    /// Four standard deviations beyond both means.
    pub fn sweep_range(&self) -> (f64, f64) {
        let lo = (self.pos_mean - 4.0 * self.pos_sd).min(self.neg_mean - 4.0 * self.neg_sd);
        let hi = (self.pos_mean + 4.0 * self.pos_sd).max(self.neg_mean + 4.0 * self.neg_sd);
        (lo, hi)
    }

    /// Expected confusion counts of the rule "positive on the positive side of τ".
    pub fn expected_counts(&self, tau: f64) -> ConfusionCounts {
        let above = self.pos_mean >= self.neg_mean;
        let side = |mean: f64, sd: f64| {
            let z = (tau - mean) / sd;
            let upper = 0.5 * erfc(z / std::f64::consts::SQRT_2);
            if above {
                upper
            } else {
                1.0 - upper
            }
        };
        let (p, n) = (self.p_count as f64, self.n_count as f64);
        let tp = p * side(self.pos_mean, self.pos_sd);
        let fp = n * side(self.neg_mean, self.neg_sd);
        ConfusionCounts {
            tp,
            fp,
            fn_: p - tp,
            tn: n - fp,
        }
    }
}

/// A fitted 1-D threshold rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRule {
    pub tau: f64,
    pub positive_above: bool,
}

impl ThresholdRule {
    pub fn predict(&self, x: f64) -> Label {
        Label::from_bool(if self.positive_above {
            x >= self.tau
        } else {
            x <= self.tau
        })
    }

    pub fn predict_dataset(&self, data: &LabeledDataset) -> Result<Vec<Label>> {
        if data.dim() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                got: data.dim(),
            });
        }
        Ok(data.features().iter().map(|&x| self.predict(x)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub rule: ThresholdRule,
    pub best: MetricsReport,
    /// Distance between consecutive candidate thresholds.
    pub step: f64,
    /// Every candidate with its metrics, in increasing τ.
    pub curve: Vec<(f64, MetricsReport)>,
}

impl OracleResult {
    pub fn tau(&self) -> f64 {
        self.rule.tau
    }
}

fn sweep(
    lo: f64,
    hi: f64,
    steps: usize,
    objective: Objective,
    counts: impl Fn(f64) -> ConfusionCounts,
) -> Result<(f64, Vec<(f64, MetricsReport)>)> {
    if steps < 2 {
        return Err(Error::Config(format!(
            "threshold sweep needs at least 2 steps, got {steps}"
        )));
    }
    if let Objective::FBeta(b) = objective {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Config(format!("beta must be positive, got {b}")));
        }
    }
    let step = (hi - lo) / (steps - 1) as f64;
    let curve = (0..steps)
        .map(|i| {
            let tau = if i + 1 == steps {
                hi
            } else {
                lo + i as f64 * step
            };
            metrics_from_counts(&counts(tau), objective.beta()).map(|m| (tau, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((step, curve))
}

fn pick(
    objective: Objective,
    positive_above: bool,
    step: f64,
    curve: Vec<(f64, MetricsReport)>,
) -> OracleResult {
    let mut best = 0;
    for (i, (_, m)) in curve.iter().enumerate() {
        if objective.score(m) > objective.score(&curve[best].1) {
            best = i;
        }
    }
    OracleResult {
        rule: ThresholdRule {
            tau: curve[best].0,
            positive_above,
        },
        best: curve[best].1,
        step,
        curve,
    }
}

/// Sweep over `[min, max]` of the samples, scoring hard counts.
pub fn threshold_oracle(
    data: &LabeledDataset,
    objective: Objective,
    steps: usize,
) -> Result<OracleResult> {
    if data.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: data.dim(),
        });
    }
    data.require_per_class(1)?;
    let mut pos = data.class_points(Label::Positive);
    let mut neg = data.class_points(Label::Negative);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let positive_above = mean(&pos) >= mean(&neg);
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    let lo = pos[0].min(neg[0]);
    let hi = pos[pos.len() - 1].max(neg[neg.len() - 1]);
    let side = |v: &[f64], tau: f64| -> f64 {
        if positive_above {
            (v.len() - v.partition_point(|&x| x < tau)) as f64
        } else {
            v.partition_point(|&x| x <= tau) as f64
        }
    };
    let (p, n) = (pos.len() as f64, neg.len() as f64);
    let (step, curve) = sweep(lo, hi, steps, objective, |tau| {
        let tp = side(&pos, tau);
        let fp = side(&neg, tau);
        ConfusionCounts {
            tp,
            fp,
            fn_: p - tp,
            tn: n - fp,
        }
    })?;
    Ok(pick(objective, positive_above, step, curve))
}

/// Sweep over [`ToySpec::sweep_range`], scoring expected counts from the
/// Gaussian tail integrals.
pub fn threshold_oracle_analytic(
    spec: &ToySpec,
    objective: Objective,
    steps: usize,
) -> Result<OracleResult> {
    let (lo, hi) = spec.sweep_range();
    let (step, curve) = sweep(lo, hi, steps, objective, |tau| spec.expected_counts(tau))?;
    Ok(pick(objective, spec.pos_mean >= spec.neg_mean, step, curve))
}
