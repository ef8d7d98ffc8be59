//! Confusion-matrix measures from hard predictions or smoothed density integrals.

use crate::data::Label;
use crate::density::DensityPair;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::heaviside::heaviside;
use crate::par::Execution;

/// Real-valued so smoothed integral estimates fit the same type.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConfusionCounts {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
    pub tn: f64,
}

impl ConfusionCounts {
    pub fn total(&self) -> f64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&self, other: &ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub beta: f64,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f_beta: f64,
    /// (β²FN + FP)/TP; `+∞` when there are no true positives.
    pub epsilon: f64,
    /// Set when tp = 0 and the ratios above are placeholders.
    pub degenerate: bool,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "beta,f_beta,accuracy,recall,precision,epsilon";

    /// One CSV row; the four ratios as percentages with two decimals.
    pub fn csv_row(&self) -> String {
        let eps = if self.epsilon.is_finite() {
            format!("{:.6}", self.epsilon)
        } else {
            "inf".to_string()
        };
        format!(
            "{},{:.2},{:.2},{:.2},{:.2},{eps}",
            self.beta,
            100.0 * self.f_beta,
            100.0 * self.accuracy,
            100.0 * self.recall,
            100.0 * self.precision
        )
    }
}

pub fn metrics_from_counts(c: &ConfusionCounts, beta: f64) -> Result<MetricsReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Config(format!("beta must be positive, got {beta}")));
    }
    let ConfusionCounts { tp, fp, fn_, tn } = *c;
    if [tp, fp, fn_, tn].iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::DegenerateData(
            "confusion counts must be finite and nonnegative".into(),
        ));
    }
    let total = c.total();
    if total == 0.0 {
        return Err(Error::EmptyConfusion);
    }
    let accuracy = (tp + tn) / total;
    let b2 = beta * beta;
    if tp == 0.0 {
        return Ok(MetricsReport {
            beta,
            accuracy,
            recall: 0.0,
            precision: 0.0,
            f_beta: 0.0,
            epsilon: f64::INFINITY,
            degenerate: true,
        });
    }
    let recall = tp / (tp + fn_);
    let precision = tp / (tp + fp);
    let epsilon = (b2 * fn_ + fp) / tp;
    Ok(MetricsReport {
        beta,
        accuracy,
        recall,
        precision,
        f_beta: (1.0 + b2) * recall * precision / (b2 * precision + recall),
        epsilon,
        degenerate: false,
    })
}

pub fn confusion_from_predictions(
    labels: &[Label],
    predictions: &[Label],
) -> Result<ConfusionCounts> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut c = ConfusionCounts::default();
    for (l, p) in labels.iter().zip(predictions) {
        match (l.is_positive(), p.is_positive()) {
            (true, true) => c.tp += 1.0,
            (true, false) => c.fn_ += 1.0,
            (false, true) => c.fp += 1.0,
            (false, false) => c.tn += 1.0,
        }
    }
    Ok(c)
}

/// Count-scaled integrals of H(±u)·f± over the grid.
pub fn smoothed_confusion(u: &ScalarField, d: &DensityPair, eps_h: f64) -> Result<ConfusionCounts> {
    smoothed_confusion_with(u, d, eps_h, Execution::default())
}

pub fn smoothed_confusion_with(
    u: &ScalarField,
    d: &DensityPair,
    eps_h: f64,
    exec: Execution,
) -> Result<ConfusionCounts> {
    u.same_grid(&d.f_pos)?;
    let w = u.grid().quadrature_weights();
    let (uv, fp, fm) = (u.values(), d.f_pos.values(), d.f_neg.values());
    let [pos_in, pos_out, neg_in, neg_out] = exec.sum_n(uv.len(), |k| {
        let hi = heaviside(uv[k], eps_h);
        let ho = heaviside(-uv[k], eps_h);
        [
            w[k] * hi * fp[k],
            w[k] * ho * fp[k],
            w[k] * hi * fm[k],
            w[k] * ho * fm[k],
        ]
    });
    let (p, n) = (d.p_count as f64, d.n_count as f64);
    Ok(ConfusionCounts {
        tp: p * pos_in,
        fn_: p * pos_out,
        fp: n * neg_in,
        tn: n * neg_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Counts with the given recall and precision over one unit of positives.
    fn from_rates(recall: f64, precision: f64) -> ConfusionCounts {
        ConfusionCounts {
            tp: recall,
            fn_: 1.0 - recall,
            fp: recall * (1.0 - precision) / precision,
            tn: 10.0,
        }
    }

    #[test]
    fn published_f1_values() {
        let m = metrics_from_counts(&from_rates(0.7825, 0.2145), 1.0).unwrap();
        assert_abs_diff_eq!(m.f_beta, 0.3367, epsilon = 1e-4);
        let m = metrics_from_counts(&from_rates(0.0081, 0.1637), 1.0).unwrap();
        assert_abs_diff_eq!(m.f_beta, 0.0154, epsilon = 2e-4);
    }

    #[test]
    fn direct_formula() {
        let c = ConfusionCounts {
            tp: 50.0,
            fp: 0.0,
            fn_: 50.0,
            tn: 0.0,
        };
        let m = metrics_from_counts(&c, 1.0).unwrap();
        assert_eq!((m.recall, m.precision), (0.5, 1.0));
        assert_abs_diff_eq!(m.f_beta, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_and_empty() {
        let c = ConfusionCounts {
            tp: 0.0,
            fp: 3.0,
            fn_: 2.0,
            tn: 5.0,
        };
        let m = metrics_from_counts(&c, 1.0).unwrap();
        assert!(m.degenerate && m.epsilon.is_infinite() && m.f_beta == 0.0);
        assert!(m.csv_row().ends_with(",inf"));
        assert!(matches!(
            metrics_from_counts(&ConfusionCounts::default(), 1.0),
            Err(Error::EmptyConfusion)
        ));
    }

    #[test]
    fn csv_row_layout() {
        let c = ConfusionCounts {
            tp: 50.0,
            fp: 0.0,
            fn_: 50.0,
            tn: 0.0,
        };
        let row = metrics_from_counts(&c, 1.0).unwrap().csv_row();
        assert_eq!(row, "1,66.67,50.00,50.00,100.00,1.000000");
    }

    #[test]
    fn hard_counts() {
        use Label::{Negative as N, Positive as P};
        let c = confusion_from_predictions(&[P; 5], &[P; 5]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 5.0,
                ..Default::default()
            }
        );
        let c = confusion_from_predictions(&[P; 5], &[N; 5]).unwrap();
        assert_eq!(c.fn_, 5.0);
        let c = confusion_from_predictions(&[P, N, P, N], &[P, P, N, N]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1.0,
                fp: 1.0,
                fn_: 1.0,
                tn: 1.0
            }
        );
        assert!(matches!(
            confusion_from_predictions(&[P], &[P, N]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
    }

    fn flat_pair() -> DensityPair {
        let g = GridSpec::new(vec![(0.0, 1.0)], vec![10]).unwrap();
        let f = ScalarField::constant(g, 1.0);
        DensityPair::new(f.clone(), f, 40, 600).unwrap()
    }

    #[test]
    fn smoothed_constant_fields() {
        let d = flat_pair();
        let eps = 1e-3;
        let up = ScalarField::constant(d.grid().clone(), 1.0);
        let c = smoothed_confusion(&up, &d, eps).unwrap();
        let tail = heaviside(-1.0, eps);
        assert_abs_diff_eq!(c.tp, 40.0 * (1.0 - tail), epsilon = 1e-9);
        assert_abs_diff_eq!(c.fn_, 40.0 * tail, epsilon = 1e-9);
        assert_abs_diff_eq!(c.fp, 600.0 * (1.0 - tail), epsilon = 1e-9);
        let down = up.map(|v| -v);
        let c = smoothed_confusion(&down, &d, eps).unwrap();
        assert_abs_diff_eq!(c.fn_, 40.0 * (1.0 - tail), epsilon = 1e-9);
        assert_abs_diff_eq!(c.tn, 600.0 * (1.0 - tail), epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn f_beta_and_epsilon_are_linked(
            tp in 1.0..1e4f64, fp in 0.0..1e4f64, fn_ in 0.0..1e4f64, tn in 0.0..1e4f64, beta in 0.05..20.0f64,
        ) {
            let m = metrics_from_counts(&ConfusionCounts { tp, fp, fn_, tn }, beta).unwrap();
            let b2 = beta * beta;
            prop_assert!((m.f_beta - (1.0 + b2) / (1.0 + b2 + m.epsilon)).abs() < 1e-12);
            for v in [m.accuracy, m.recall, m.precision, m.f_beta] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn f_beta_decreases_with_epsilon(
            tp in 1.0..1e3f64, fp in 0.0..1e3f64, fn_ in 0.0..1e3f64, extra in 0.1..1e3f64, beta in 0.1..10.0f64,
        ) {
            let a = metrics_from_counts(&ConfusionCounts { tp, fp, fn_, tn: 1.0 }, beta).unwrap();
            let b = metrics_from_counts(&ConfusionCounts { tp, fp: fp + extra, fn_, tn: 1.0 }, beta).unwrap();
            prop_assert!(b.epsilon > a.epsilon);
            prop_assert!(b.f_beta < a.f_beta);
        }

        #[test]
        fn beta_limits(tp in 1.0..1e3f64, fp in 0.0..1e3f64, fn_ in 0.0..1e3f64) {
            let c = ConfusionCounts { tp, fp, fn_, tn: 5.0 };
            let hi = metrics_from_counts(&c, 100.0).unwrap();
            let lo = metrics_from_counts(&c, 0.01).unwrap();
            prop_assert!((hi.f_beta - hi.recall).abs() < 1e-2);
            prop_assert!((lo.f_beta - lo.precision).abs() < 1e-2);
        }

        #[test]
        fn smoothed_partition_identity(seed in 0u64..500, eps in 0.01..1.0f64) {
            let d = flat_pair();
            let u = ScalarField::from_fn(d.grid().clone(), |x| ((seed as f64 + 1.0) * x[0]).sin() - 0.2);
            let c = smoothed_confusion(&u, &d, eps).unwrap();
            prop_assert!((c.tp + c.fn_ - 40.0).abs() < 1e-9);
            prop_assert!((c.fp + c.tn - 600.0).abs() < 1e-9);
        }
    }
}
