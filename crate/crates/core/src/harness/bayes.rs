//! Gaussian naive Bayes with class priors from the training counts.

use crate::data::{Label, LabeledDataset};
use crate::error::{Error, Result};

/// Default floor applied to per-feature variances.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    log_prior_pos: f64,
    log_prior_neg: f64,
    mean_pos: Vec<f64>,
    var_pos: Vec<f64>,
    mean_neg: Vec<f64>,
    var_neg: Vec<f64>,
}

pub fn naive_bayes_fit(data: &LabeledDataset) -> Result<GaussianNb> {
    naive_bayes_fit_with(data, Some(VARIANCE_FLOOR))
}

/// With `floor = None`, a zero-variance feature is a degenerate-data error.
pub fn naive_bayes_fit_with(data: &LabeledDataset, floor: Option<f64>) -> Result<GaussianNb> {
    data.require_per_class(2)?;
    let d = data.dim();
    let moments = |label: Label| -> Result<(Vec<f64>, Vec<f64>)> {
        let pts = data.class_points(label);
        let m = (pts.len() / d) as f64;
        let mut mean = vec![0.0; d];
        for p in pts.chunks_exact(d) {
            for (a, &x) in p.iter().enumerate() {
                mean[a] += x;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m);
        let mut var = vec![0.0; d];
        for p in pts.chunks_exact(d) {
            for (a, &x) in p.iter().enumerate() {
                var[a] += (x - mean[a]).powi(2);
            }
        }
        for (a, v) in var.iter_mut().enumerate() {
            *v /= m;
            match floor {
                Some(f) => *v = v.max(f),
                None if *v <= 0.0 => {
                    return Err(Error::DegenerateData(format!(
                        "feature {a} has zero variance in the {label:?} class"
                    )));
                }
                None => {}
            }
        }
        Ok((mean, var))
    };
    let (mean_pos, var_pos) = moments(Label::Positive)?;
    let (mean_neg, var_neg) = moments(Label::Negative)?;
    GaussianNb::from_moments(
        data.p_count(),
        data.n_count(),
        mean_pos,
        var_pos,
        mean_neg,
        var_neg,
    )
}

impl GaussianNb {
    /// Model from class counts and per-feature means and variances.
    pub fn from_moments(
        p_count: usize,
        n_count: usize,
        mean_pos: Vec<f64>,
        var_pos: Vec<f64>,
        mean_neg: Vec<f64>,
        var_neg: Vec<f64>,
    ) -> Result<Self> {
        let d = mean_pos.len();
        if [var_pos.len(), mean_neg.len(), var_neg.len()]
            .iter()
            .any(|&l| l != d)
            || d == 0
        {
            return Err(Error::DegenerateData(
                "moment vectors must share one nonzero length".into(),
            ));
        }
        if var_pos
            .iter()
            .chain(&var_neg)
            .any(|&v| !(v > 0.0 && v.is_finite()))
        {
            return Err(Error::DegenerateData("variances must be positive".into()));
        }
        if p_count == 0 || n_count == 0 {
            return Err(Error::DegenerateData(
                "class counts must be positive".into(),
            ));
        }
        let total = (p_count + n_count) as f64;
        Ok(GaussianNb {
            log_prior_pos: (p_count as f64 / total).ln(),
            log_prior_neg: (n_count as f64 / total).ln(),
            mean_pos,
            var_pos,
            mean_neg,
            var_neg,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean_pos.len()
    }

    /// log P(+|x) − log P(−|x).
    pub fn log_odds(&self, x: &[f64]) -> f64 {
        let ll = |mean: &[f64], var: &[f64]| -> f64 {
            x.iter()
                .zip(mean.iter().zip(var))
                .map(|(&xi, (&m, &v))| -0.5 * (v.ln() + (xi - m).powi(2) / v))
                .sum()
        };
        self.log_prior_pos + ll(&self.mean_pos, &self.var_pos)
            - self.log_prior_neg
            - ll(&self.mean_neg, &self.var_neg)
    }

    /// Maximum-posterior class; equal posteriors go to the positive class.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(Label::from_bool(self.log_odds(x) >= 0.0))
    }

    pub fn predict_dataset(&self, data: &LabeledDataset) -> Result<Vec<Label>> {
        data.points().map(|p| self.predict(p)).collect()
    }

    /// Sorted points where the posteriors are equal (1-D models only).
    pub fn thresholds(&self) -> Result<Vec<f64>> {
        if self.dim() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                got: self.dim(),
            });
        }
        let (mp, vp, mn, vn) = (
            self.mean_pos[0],
            self.var_pos[0],
            self.mean_neg[0],
            self.var_neg[0],
        );
        // log_odds(x) = a·x² + b·x + c
        let a = 0.5 / vn - 0.5 / vp;
        let b = mp / vp - mn / vn;
        let c = self.log_prior_pos - self.log_prior_neg - 0.5 * (vp / vn).ln() - 0.5 * mp * mp / vp
            + 0.5 * mn * mn / vn;
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if a.abs() <= 1e-12 * scale {
            return Ok(if b == 0.0 { vec![] } else { vec![-c / b] });
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Ok(vec![]);
        }
        // numerically stable quadratic roots
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let mut roots = if q == 0.0 {
            vec![0.0]
        } else {
            vec![q / a, c / q]
        };
        roots.sort_by(f64::total_cmp);
        roots.dedup();
        Ok(roots)
    }
}
