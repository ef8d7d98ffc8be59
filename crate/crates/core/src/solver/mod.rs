//! Explicit gradient flow of the decision field with periodic reinitialization.

mod reinit;

pub use reinit::{reinitialize, Reinitialized};

use std::fmt;
use std::io::Write;

use crate::classifier::TrainedClassifier;
use crate::density::{BandwidthRule, DensityPair};
use crate::energy::{Descent, Kernel, Measure, MeasureEnergy, RegionSums};
use crate::error::{Error, Result};
use crate::field::{init_shape, laplacian_into, GridSpec, InitShape, ScalarField};
use crate::par::Execution;

/// Consecutive small updates required before declaring convergence.
pub const CONVERGENCE_STREAK: usize = 5;
/// A step may move a node by at most this many cells before it is rejected.
pub const STEP_LIMIT_CELLS: f64 = 10.0;
/// Default Heaviside width in cells of the coarsest axis.
pub const EPS_CELLS: f64 = 1.0;

/// Default cells per axis for a `dim`-dimensional grid.
pub fn default_cells(dim: usize) -> usize {
    match dim {
        1 => 1024,
        2 => 128,
        3 => 64,
        _ => 16,
    }
}

/// Training parameters. `None` fields are derived from the grid at train time
/// and reported in [`ResolvedParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub measure: Measure,
    pub dt: Option<f64>,
    pub lambda: Option<f64>,
    pub eps_h: Option<f64>,
    pub tol: f64,
    pub reinit_every: usize,
    pub max_iter: usize,
    /// Cells per axis; one value applies to every axis.
    pub resolution: Option<Vec<usize>>,
    pub init: InitShape,
    pub seed: u64,
    pub descent: Descent,
    pub bandwidth: BandwidthRule,
    pub exec: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            measure: Measure::f1(),
            dt: None,
            lambda: None,
            eps_h: None,
            tol: 1e-5,
            reinit_every: 50,
            max_iter: 10_000,
            resolution: None,
            init: InitShape::default(),
            seed: 0,
            descent: Descent::Derivative,
            bandwidth: BandwidthRule::Scott,
            exec: Execution::default(),
        }
    }
}

fn auto_or<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or("auto".to_string(), |x| x.to_string())
}

fn parse_auto<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" {
        return Ok(None);
    }
    value
        .parse()
        .map(Some)
        .map_err(|_| Error::Config(format!("bad value '{value}' for {key}")))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for {key}")))
}

impl TrainConfig {
    pub fn f_beta(beta: f64) -> Self {
        TrainConfig {
            measure: Measure::FBeta { beta },
            ..Default::default()
        }
    }

    pub fn accuracy() -> Self {
        TrainConfig {
            measure: Measure::Accuracy,
            ..Default::default()
        }
    }

    pub fn beta(&self) -> f64 {
        self.measure.beta()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(Error::Config(format!("{name} must be positive, got {x}")))
            }
            _ => Ok(()),
        };
        if let Measure::FBeta { beta } = self.measure {
            positive("beta", Some(beta))?;
        }
        positive("dt", self.dt)?;
        positive("eps_h", self.eps_h)?;
        positive("tol", Some(self.tol))?;
        if let Some(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Config(format!(
                    "lambda must be nonnegative, got {l}"
                )));
            }
        }
        if self.reinit_every == 0 || self.max_iter == 0 {
            return Err(Error::Config(
                "reinit_every and max_iter must be positive".into(),
            ));
        }
        if let Some(r) = &self.resolution {
            if r.is_empty() || r.iter().any(|&c| c < 4) {
                return Err(Error::Config(
                    "resolution needs at least 4 cells per axis".into(),
                ));
            }
        }
        Ok(())
    }

    /// Cells per axis for `dim` features.
    pub fn cells_for(&self, dim: usize) -> Result<Vec<usize>> {
        match &self.resolution {
            None => Ok(vec![default_cells(dim); dim]),
            Some(r) if r.len() == 1 => Ok(vec![r[0]; dim]),
            Some(r) if r.len() == dim => Ok(r.clone()),
            Some(r) => Err(Error::Config(format!(
                "resolution has {} entries for {dim} features",
                r.len()
            ))),
        }
    }

    /// Key/value form used by model files and experiment configs.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let resolution = self.resolution.as_ref().map_or("auto".to_string(), |r| {
            r.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        });
        vec![
            ("measure", self.measure.to_string()),
            ("descent", self.descent.to_string()),
            ("dt", auto_or(&self.dt)),
            ("lambda", auto_or(&self.lambda)),
            ("eps_h", auto_or(&self.eps_h)),
            ("tol", self.tol.to_string()),
            ("reinit_every", self.reinit_every.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("resolution", resolution),
            ("init", self.init.to_string()),
            ("seed", self.seed.to_string()),
            ("bandwidth", self.bandwidth.to_string()),
        ]
    }

    /// Applies one key/value pair. Returns `Ok(false)` for keys this type
    /// does not own, so callers can layer their own keys on top.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let value = value.trim();
        match key {
            "measure" => self.measure = value.parse()?,
            "beta" => {
                let beta: f64 = parse(key, value)?;
                self.measure = Measure::FBeta { beta };
            }
            "descent" => self.descent = value.parse()?,
            "dt" => self.dt = parse_auto(key, value)?,
            "lambda" => self.lambda = parse_auto(key, value)?,
            "eps_h" => self.eps_h = parse_auto(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "reinit_every" => self.reinit_every = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "resolution" => {
                self.resolution = if value == "auto" {
                    None
                } else {
                    Some(
                        value
                            .split(',')
                            .map(|c| parse(key, c.trim()))
                            .collect::<Result<Vec<usize>>>()?,
                    )
                }
            }
            "init" => self.init = value.parse()?,
            "seed" => self.seed = parse(key, value)?,
            "bandwidth" => self.bandwidth = value.parse()?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Parameters for a run on `grid`, given max |descent| at the initial field.
    pub fn resolve(&self, grid: &GridSpec, max_direction: f64) -> ResolvedParams {
        let h = grid.max_spacing();
        let dt = self.dt.unwrap_or_else(|| {
            let h_min = grid.min_spacing();
            if max_direction > 0.0 {
                0.5 * h_min / max_direction
            } else {
                0.5 * h_min
            }
        });
        ResolvedParams {
            dt,
            eps_h: self.resolved_eps(grid),
            lambda: self.lambda.unwrap_or(0.1 * h * h),
        }
    }

    pub fn resolved_eps(&self, grid: &GridSpec) -> f64 {
        self.eps_h.unwrap_or(EPS_CELLS * grid.max_spacing())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams {
    pub dt: f64,
    pub eps_h: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub energy: f64,
    pub max_update: f64,
    pub reinit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainStatus {
    Converged,
    MaxIter,
}

impl fmt::Display for TrainStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainStatus::Converged => "converged",
            TrainStatus::MaxIter => "max-iter",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    /// Record 0 holds the initial energy; record n the state after step n.
    pub records: Vec<TraceRecord>,
    pub status: TrainStatus,
    /// The flow was restarted from the default lattice once.
    pub restarted: bool,
    /// Steps rejected by the step-size guard (each halved dt).
    pub rejected_steps: usize,
    /// Parameters in effect at the end of the run.
    pub params: ResolvedParams,
}

impl EvolutionTrace {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }

    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.energy)
    }

    /// `#`-prefixed run parameters, then `iteration,energy,max_update,reinit`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let p = &self.params;
        writeln!(w, "# dt={} eps_h={} lambda={}", p.dt, p.eps_h, p.lambda)?;
        writeln!(
            w,
            "# status={} restarted={} rejected_steps={}",
            self.status, self.restarted, self.rejected_steps
        )?;
        writeln!(w, "iteration,energy,max_update,reinit")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{}",
                r.iteration, r.energy, r.max_update, r.reinit as u8
            )?;
        }
        Ok(())
    }
}

/// Node buffers and bound energy for one run.
struct Flow<'a> {
    kernel: Kernel<'a>,
    grid: &'a GridSpec,
    descent: Descent,
    lambda: f64,
    exec: Execution,
    dir: Vec<f64>,
    lap: Vec<f64>,
}

impl<'a> Flow<'a> {
    fn new(
        energy: MeasureEnergy,
        d: &'a DensityPair,
        eps: f64,
        lambda: f64,
        descent: Descent,
        exec: Execution,
    ) -> Self {
        let n = d.grid().node_count();
        Flow {
            kernel: Kernel::new(energy, d, eps, exec),
            grid: d.grid(),
            descent,
            lambda,
            exec,
            dir: vec![0.0; n],
            lap: vec![0.0; n],
        }
    }

    fn direction(&mut self, u: &[f64], sums: &RegionSums, e: f64) {
        self.kernel
            .direction(u, sums, e, self.descent, &mut self.dir);
    }

    fn max_direction(&self) -> f64 {
        self.dir.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// out = u − dt·(dir − λΔu); returns max |out − u|.
    fn propose(&mut self, u: &[f64], dt: f64, out: &mut [f64]) -> f64 {
        let (dir, lam) = (&self.dir, self.lambda);
        if lam > 0.0 {
            laplacian_into(self.grid, u, &mut self.lap, self.exec);
            let lap = &self.lap;
            self.exec.fill(out, |i| u[i] - dt * (dir[i] - lam * lap[i]));
        } else {
            self.exec.fill(out, |i| u[i] - dt * dir[i]);
        }
        u.iter()
            .zip(out.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// One explicit step. Parameters left on auto are resolved against `u`.
pub fn step(
    u: &ScalarField,
    e: &MeasureEnergy,
    d: &DensityPair,
    cfg: &TrainConfig,
) -> Result<ScalarField> {
    cfg.validate()?;
    u.same_grid(&d.f_pos)?;
    let grid = d.grid();
    let eps = cfg.resolved_eps(grid);
    let lambda = cfg.lambda.unwrap_or(0.1 * grid.max_spacing().powi(2));
    let mut flow = Flow::new(*e, d, eps, lambda, cfg.descent, cfg.exec);
    let sums = flow.kernel.integrals(u.values());
    let energy = flow.kernel.energy(&sums)?;
    flow.direction(u.values(), &sums, energy);
    let params = cfg.resolve(grid, flow.max_direction());
    let mut out = vec![0.0; u.values().len()];
    let change = flow.propose(u.values(), params.dt, &mut out);
    let limit = STEP_LIMIT_CELLS * grid.max_spacing();
    if change > limit {
        return Err(Error::StepRejected { change, limit });
    }
    ScalarField::new(grid.clone(), out)
}

/// Evolves `cfg.init` under the flow of `e` until the update stalls.
pub fn train(
    d: &DensityPair,
    e: &MeasureEnergy,
    cfg: &TrainConfig,
) -> Result<(TrainedClassifier, EvolutionTrace)> {
    cfg.validate()?;
    let grid = d.grid();
    if grid.cells().iter().any(|&c| c < 4) {
        return Err(Error::InvalidGrid(
            "training needs at least 4 cells per axis".into(),
        ));
    }
    let u0 = init_shape(grid, &cfg.init)?;
    let (u, trace) = match evolve(d, e, cfg, u0.into_values()) {
        Err(Error::VanishingPositiveMass) => {
            log::warn!(
                "decision region lost all positive mass; restarting from the default lattice"
            );
            let u0 = init_shape(grid, &InitShape::default())?;
            let (u, mut trace) = evolve(d, e, cfg, u0.into_values())?;
            trace.restarted = true;
            (u, trace)
        }
        other => other?,
    };
    let u = ScalarField::new(grid.clone(), u)?;
    let model = TrainedClassifier::new(u, *e, d, cfg.clone(), trace.params);
    Ok((model, trace))
}

fn evolve(
    d: &DensityPair,
    e: &MeasureEnergy,
    cfg: &TrainConfig,
    mut u: Vec<f64>,
) -> Result<(Vec<f64>, EvolutionTrace)> {
    let grid = d.grid();
    let eps = cfg.resolved_eps(grid);
    let lambda = cfg.lambda.unwrap_or(0.1 * grid.max_spacing().powi(2));
    let mut flow = Flow::new(*e, d, eps, lambda, cfg.descent, cfg.exec);

    let mut sums = flow.kernel.integrals(&u);
    let mut energy = flow.kernel.energy(&sums)?;
    flow.direction(&u, &sums, energy);
    let mut params = cfg.resolve(grid, flow.max_direction());
    let limit = STEP_LIMIT_CELLS * grid.max_spacing();

    let mut records = vec![TraceRecord {
        iteration: 0,
        energy,
        max_update: 0.0,
        reinit: false,
    }];
    let mut next = vec![0.0; u.len()];
    let mut streak = 0;
    let mut rejected = 0;
    let mut status = TrainStatus::MaxIter;

    for it in 1..=cfg.max_iter {
        let change = loop {
            let change = flow.propose(&u, params.dt, &mut next);
            if change <= limit {
                break change;
            }
            rejected += 1;
            params.dt *= 0.5;
            log::debug!(
                "iteration {it}: update {change:.3e} over limit, dt -> {:.3e}",
                params.dt
            );
            if params.dt < f64::MIN_POSITIVE {
                return Err(Error::StepRejected { change, limit });
            }
        };
        let mut reinit = false;
        if it % cfg.reinit_every == 0 {
            if let Some(v) = reinit::distance_values(grid, &next) {
                next = v;
                reinit = true;
            }
        }
        std::mem::swap(&mut u, &mut next);
        sums = flow.kernel.integrals(&u);
        energy = flow.kernel.energy(&sums)?;
        records.push(TraceRecord {
            iteration: it,
            energy,
            max_update: change,
            reinit,
        });
        streak = if change < cfg.tol { streak + 1 } else { 0 };
        if streak >= CONVERGENCE_STREAK {
            status = TrainStatus::Converged;
            break;
        }
        flow.direction(&u, &sums, energy);
    }
    log::debug!(
        "flow finished after {} iterations ({status}), E = {energy}",
        records.len() - 1
    );
    Ok((
        u,
        EvolutionTrace {
            records,
            status,
            restarted: false,
            rejected_steps: rejected,
            params,
        },
    ))
}
