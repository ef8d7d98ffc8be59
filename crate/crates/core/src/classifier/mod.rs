//! End-to-end model: fit on labeled data, predict by the sign of the field.

mod frontier;
mod io;

pub use frontier::{principal_threshold, zero_set, Frontier, Polyline};
pub use io::{load_model, read_model, save_model, write_model, MODEL_VERSION};

use sha2::{Digest, Sha256};

use crate::data::{Label, LabeledDataset};
use crate::density::{estimate_pair_with, DensityPair};
use crate::energy::{Measure, MeasureEnergy};
use crate::error::{Error, Result};
use crate::field::{GridSpec, OutOfBounds, ScalarField};
use crate::solver::{self, EvolutionTrace, ResolvedParams, TrainConfig};

/// Fraction of the data extent added on each side of the training grid.
pub const GRID_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    u: ScalarField,
    energy: MeasureEnergy,
    config: TrainConfig,
    params: ResolvedParams,
    densities_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// Interpolated decision value.
    pub value: f64,
    /// The query lay outside the grid and was clamped to it.
    pub clamped: bool,
}

/// Everything produced by [`fit_detailed`].
#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: TrainedClassifier,
    pub trace: EvolutionTrace,
    pub densities: DensityPair,
}

impl TrainedClassifier {
    pub(crate) fn new(
        u: ScalarField,
        energy: MeasureEnergy,
        d: &DensityPair,
        config: TrainConfig,
        params: ResolvedParams,
    ) -> Self {
        TrainedClassifier {
            u,
            energy,
            config,
            params,
            densities_hash: densities_fingerprint(d),
        }
    }

    pub(crate) fn from_parts(
        u: ScalarField,
        energy: MeasureEnergy,
        config: TrainConfig,
        params: ResolvedParams,
        densities_hash: String,
    ) -> Self {
        TrainedClassifier {
            u,
            energy,
            config,
            params,
            densities_hash,
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.u
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn measure(&self) -> Measure {
        self.energy.measure()
    }

    pub fn energy(&self) -> &MeasureEnergy {
        &self.energy
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn params(&self) -> &ResolvedParams {
        &self.params
    }

    pub fn densities_hash(&self) -> &str {
        &self.densities_hash
    }

    /// Every node has the same sign, so the model predicts one class only.
    pub fn is_degenerate(&self) -> bool {
        !self.u.has_sign_change()
    }

    /// Same model with the decision field replaced (same grid required).
    pub fn with_field(&self, u: ScalarField) -> Result<Self> {
        u.same_grid(&self.u)?;
        Ok(TrainedClassifier { u, ..self.clone() })
    }

    /// Positive when the interpolated field is ≥ 0; an exact zero counts as
    /// positive. Points off the grid are clamped onto it.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.grid().dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid().dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateData("non-finite query point".into()));
        }
        let s = self.u.interpolate(x, OutOfBounds::Clamp)?;
        Ok(Prediction {
            label: Label::from_bool(s.value >= 0.0),
            value: s.value,
            clamped: s.clamped,
        })
    }

    pub fn predict_dataset(&self, data: &LabeledDataset) -> Result<Vec<Label>> {
        self.predict_points(data.features(), data.dim())
    }

    /// Labels for flat row-major points.
    pub fn predict_points(&self, points: &[f64], dim: usize) -> Result<Vec<Label>> {
        points
            .chunks_exact(dim)
            .map(|p| self.predict(p).map(|r| r.label))
            .collect()
    }

    /// Hex SHA-256 over the field, measure, config and density fingerprint.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for v in self.u.values() {
            h.update(v.to_bits().to_le_bytes());
        }
        for (a, &(lo, hi)) in self.grid().bounds().iter().enumerate() {
            h.update(lo.to_bits().to_le_bytes());
            h.update(hi.to_bits().to_le_bytes());
            h.update((self.grid().cells()[a] as u64).to_le_bytes());
        }
        for (k, v) in self.config.to_pairs() {
            h.update(k.as_bytes());
            h.update(v.as_bytes());
        }
        h.update(self.densities_hash.as_bytes());
        hex::encode(h.finalize())
    }
}

/// Short hex digest of both density fields and the class counts.
pub fn densities_fingerprint(d: &DensityPair) -> String {
    let mut h = Sha256::new();
    for v in d.f_pos.values().iter().chain(d.f_neg.values()) {
        h.update(v.to_bits().to_le_bytes());
    }
    h.update((d.p_count as u64).to_le_bytes());
    h.update((d.n_count as u64).to_le_bytes());
    hex::encode(&h.finalize()[..16])
}

/// Training grid for `data`: bounding box plus [`GRID_MARGIN`] per side.
pub fn training_grid(data: &LabeledDataset, cfg: &TrainConfig) -> Result<GridSpec> {
    let cells = cfg.cells_for(data.dim())?;
    GridSpec::around_points(data.features(), data.dim(), cells, GRID_MARGIN)
}

pub fn fit(
    data: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<(TrainedClassifier, EvolutionTrace)> {
    let f = fit_detailed(data, cfg)?;
    Ok((f.model, f.trace))
}

/// Like [`fit`], also returning the densities the flow ran on.
pub fn fit_detailed(data: &LabeledDataset, cfg: &TrainConfig) -> Result<Fitted> {
    cfg.validate()?;
    data.require_per_class(2)?;
    let grid = training_grid(data, cfg)?;
    let densities = estimate_pair_with(data, &grid, &cfg.bandwidth, cfg.exec)?;
    let energy = MeasureEnergy::new(cfg.measure, &densities)?;
    let (model, trace) = solver::train(&densities, &energy, cfg)?;
    log::info!(
        "trained {} on {}x{} samples: {} after {} iterations",
        cfg.measure,
        data.p_count(),
        data.n_count(),
        trace.status,
        trace.iterations()
    );
    Ok(Fitted {
        model,
        trace,
        densities,
    })
}
