//! Labeled datasets: synthetic generators, file loaders and fold splitting.

mod folds;
mod load;
mod synth;

pub use folds::{kfold, Fold};
pub use load::{
    load_csv, load_points, load_skin, CsvOptions, LabelColumn, SKIN_NEGATIVES, SKIN_POSITIVES,
};
pub use synth::{
    gen_db, gen_disjoint_1d, gen_toy1d, RING_RADIAL_SD, RING_RADIUS, TOY_NEGATIVES, TOY_POSITIVES,
};

use crate::error::{ClassTag, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// `1` for the positive class, `0` for the negative one.
    pub fn as_digit(self) -> u8 {
        self.is_positive() as u8
    }
}

/// Feature vectors stored row-major with one binary label each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
    p_count: usize,
}

impl LabeledDataset {
    pub fn new(dim: usize, features: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DegenerateData("zero-dimensional features".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * labels.len(),
                got: features.len(),
            });
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateData(format!(
                "non-finite coordinate in sample {}",
                i / dim
            )));
        }
        let p_count = labels.iter().filter(|l| l.is_positive()).count();
        Ok(LabeledDataset {
            dim,
            features,
            labels,
            p_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.dim)
    }

    pub fn p_count(&self) -> usize {
        self.p_count
    }

    pub fn n_count(&self) -> usize {
        self.labels.len() - self.p_count
    }

    /// Flat coordinates of every sample carrying `label`.
    pub fn class_points(&self, label: Label) -> Vec<f64> {
        self.points()
            .zip(&self.labels)
            .filter(|(_, &l)| l == label)
            .flat_map(|(p, _)| p.iter().copied())
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.point(i));
            labels.push(self.labels[i]);
        }
        let p_count = labels.iter().filter(|l| l.is_positive()).count();
        LabeledDataset {
            dim: self.dim,
            features,
            labels,
            p_count,
        }
    }

    /// Errors unless both classes have at least `need` samples.
    pub fn require_per_class(&self, need: usize) -> Result<()> {
        for (class, have) in [
            (ClassTag::Positive, self.p_count()),
            (ClassTag::Negative, self.n_count()),
        ] {
            if have < need {
                return Err(Error::DegenerateData(format!(
                    "{have} samples, at least {need} required"
                ))
                .tagged(class));
            }
        }
        Ok(())
    }

    /// Writes `x0,..,x{d-1},label` rows with a header line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.dim).map(|a| format!("x{a}")).collect();
        writeln!(w, "{},label", header.join(","))?;
        for (p, l) in self.points().zip(&self.labels) {
            for x in p {
                write!(w, "{x},")?;
            }
            writeln!(w, "{}", l.as_digit())?;
        }
        Ok(())
    }
}
