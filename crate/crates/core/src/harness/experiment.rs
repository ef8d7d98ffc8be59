//! Repeated k-fold cross-validation over a grid of classifiers and β values.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use super::bayes::naive_bayes_fit;
use super::oracle::{threshold_oracle, Objective};
use crate::classifier::fit;
use crate::data::{
    gen_db, gen_disjoint_1d, gen_toy1d, kfold, load_csv, load_skin, CsvOptions, Fold, Label,
    LabeledDataset,
};
use crate::energy::Measure;
use crate::error::{Error, Result};
use crate::metrics::{
    confusion_from_predictions, metrics_from_counts, ConfusionCounts, MetricsReport,
};
use crate::solver::TrainConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Toy,
    /// 100 + 100 samples on disjoint intervals.
    Disjoint,
    Db(u32),
    Csv(PathBuf),
    Skin(PathBuf),
}

impl DatasetSpec {
    pub fn load(&self, seed: u64) -> Result<LabeledDataset> {
        match self {
            DatasetSpec::Toy => Ok(gen_toy1d(seed)),
            DatasetSpec::Disjoint => Ok(gen_disjoint_1d(100, 100, seed)),
            DatasetSpec::Db(which) => gen_db(*which, seed),
            DatasetSpec::Csv(path) => load_csv(path, &CsvOptions::default()),
            DatasetSpec::Skin(path) => load_skin(path),
        }
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Toy => f.write_str("toy"),
            DatasetSpec::Disjoint => f.write_str("disjoint"),
            DatasetSpec::Db(w) => write!(f, "db{w}"),
            DatasetSpec::Csv(p) => write!(f, "csv:{}", p.display()),
            DatasetSpec::Skin(p) => write!(f, "skin:{}", p.display()),
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = Error;

    /// `toy`, `disjoint`, `db1`..`db4`, `csv:<path>` or `skin:<path>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(p) = s.strip_prefix("csv:") {
            return Ok(DatasetSpec::Csv(p.into()));
        }
        if let Some(p) = s.strip_prefix("skin:") {
            return Ok(DatasetSpec::Skin(p.into()));
        }
        match s {
            "toy" => Ok(DatasetSpec::Toy),
            "disjoint" => Ok(DatasetSpec::Disjoint),
            _ => {
                let which = s
                    .strip_prefix("db")
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| Error::Config(format!("unknown dataset '{s}'")))?;
                if !(1..=4).contains(&which) {
                    return Err(Error::InvalidDatabase(which));
                }
                Ok(DatasetSpec::Db(which))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClassifierKind {
    /// Level-set classifier trained with the configured energy.
    Ofc,
    NaiveBayes,
    /// Brute-force 1-D threshold.
    Oracle,
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Ofc => "ofc",
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::Oracle => "oracle",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ofc" => Ok(ClassifierKind::Ofc),
            "nb" | "naive-bayes" => Ok(ClassifierKind::NaiveBayes),
            "oracle" => Ok(ClassifierKind::Oracle),
            other => Err(Error::Config(format!("unknown classifier '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub dataset: DatasetSpec,
    pub classifiers: Vec<ClassifierKind>,
    pub repetitions: usize,
    pub folds: usize,
    pub betas: Vec<f64>,
    /// Drives data generation and the fold shuffles.
    pub seed: u64,
    pub stratified: bool,
    pub oracle_steps: usize,
    /// Settings for the level-set classifier. Its measure is replaced by
    /// F-β for each β in the grid unless it is set to accuracy.
    pub train: TrainConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            dataset: DatasetSpec::Db(4),
            classifiers: vec![ClassifierKind::Ofc, ClassifierKind::NaiveBayes],
            repetitions: 10,
            folds: 10,
            betas: vec![1.0],
            seed: 42,
            stratified: true,
            oracle_steps: 2000,
            train: TrainConfig {
                seed: 42,
                ..TrainConfig::default()
            },
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad entry '{}' in {key}", v.trim())))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{}' for {key}", value.trim())))
}

impl ExperimentSpec {
    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            spec.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Experiment keys first; anything else goes to the training config.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset" => self.dataset = value.parse()?,
            "classifiers" => self.classifiers = parse_list(key, value)?,
            "repetitions" => self.repetitions = parse_one(key, value)?,
            "folds" => self.folds = parse_one(key, value)?,
            "betas" | "beta" => self.betas = parse_list(key, value)?,
            "seed" => {
                self.seed = parse_one(key, value)?;
                self.train.seed = self.seed;
            }
            "stratified" => self.stratified = parse_one(key, value)?,
            "oracle_steps" => self.oracle_steps = parse_one(key, value)?,
            _ => {
                if !self.train.set(key, value)? {
                    return Err(Error::Config(format!("unknown key '{key}'")));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if self.betas.is_empty() || self.betas.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::Config(
                "betas must be a nonempty list of positive values".into(),
            ));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("no classifiers selected".into()));
        }
        if self.oracle_steps < 2 {
            return Err(Error::Config("oracle_steps must be at least 2".into()));
        }
        self.train.validate()
    }

    fn fold_seed(&self, repetition: usize) -> u64 {
        self.seed ^ (repetition as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Outcome of one classifier on one test fold.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub classifier: ClassifierKind,
    pub beta: f64,
    pub repetition: usize,
    pub fold: usize,
    pub outcome: std::result::Result<(ConfusionCounts, MetricsReport), String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (0 for a single value).
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len();
        if n == 0 {
            return MeanStd {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

/// One classifier × β row of the results table (fractions, not percent).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub classifier: ClassifierKind,
    pub beta: f64,
    pub f_beta: MeanStd,
    pub accuracy: MeanStd,
    pub recall: MeanStd,
    pub precision: MeanStd,
    /// Repetitions with at least one successful fold.
    pub repetitions: usize,
    pub failed_folds: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub raw: Vec<RawRecord>,
    pub table: Vec<AggregateRow>,
    /// Summed training and prediction time per classifier.
    pub timings: Vec<(ClassifierKind, Duration)>,
}

pub const RAW_HEADER: &str =
    "classifier,beta,repetition,fold,tp,fp,fn,tn,f_beta,accuracy,recall,precision,error";
pub const TABLE_HEADER: &str = "classifier,beta,f_beta_mean,f_beta_std,accuracy_mean,accuracy_std,recall_mean,recall_std,precision_mean,precision_std,repetitions,failed_folds";
const TABLE_NOTE: &str = "# percent; each fold scored from its own confusion counts, folds averaged within a repetition, mean and sample std over repetitions";

fn pct(v: f64) -> String {
    if v.is_finite() {
        format!("{:.4}", 100.0 * v)
    } else {
        "nan".into()
    }
}

impl ExperimentResults {
    pub fn row(&self, classifier: ClassifierKind, beta: f64) -> Option<&AggregateRow> {
        self.table
            .iter()
            .find(|r| r.classifier == classifier && r.beta == beta)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RawRecord> {
        self.raw.iter().filter(|r| r.outcome.is_err())
    }

    /// One row per classifier × β × repetition × fold, full precision.
    pub fn write_raw_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{RAW_HEADER}")?;
        for r in &self.raw {
            write!(
                w,
                "{},{},{},{},",
                r.classifier, r.beta, r.repetition, r.fold
            )?;
            match &r.outcome {
                Ok((c, m)) => writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},",
                    c.tp, c.fp, c.fn_, c.tn, m.f_beta, m.accuracy, m.recall, m.precision
                )?,
                Err(e) => writeln!(w, ",,,,,,,,\"{}\"", e.replace('"', "'"))?,
            }
        }
        Ok(())
    }

    pub fn write_table_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TABLE_NOTE}")?;
        writeln!(w, "{TABLE_HEADER}")?;
        for r in &self.table {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.classifier,
                r.beta,
                pct(r.f_beta.mean),
                pct(r.f_beta.std),
                pct(r.accuracy.mean),
                pct(r.accuracy.std),
                pct(r.recall.mean),
                pct(r.recall.std),
                pct(r.precision.mean),
                pct(r.precision.std),
                r.repetitions,
                r.failed_folds
            )?;
        }
        Ok(())
    }
}

/// Loads the dataset named by `spec` and runs the experiment on it.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResults> {
    spec.validate()?;
    let data = spec.dataset.load(spec.seed)?;
    run_experiment_on(spec, &data)
}

struct Job {
    classifier: ClassifierKind,
    /// Indices into `spec.betas` scored by this job.
    betas: Vec<usize>,
    repetition: usize,
    fold: usize,
}

/// Runs every classifier × β × repetition × fold cell on `data`. Cell
/// failures are recorded in the results; only invalid specs or splits abort.
pub fn run_experiment_on(
    spec: &ExperimentSpec,
    data: &LabeledDataset,
) -> Result<ExperimentResults> {
    spec.validate()?;
    let splits: Vec<Vec<Fold>> = (0..spec.repetitions)
        .map(|r| kfold(data, spec.folds, spec.fold_seed(r), spec.stratified))
        .collect::<Result<_>>()?;

    let all_betas: Vec<usize> = (0..spec.betas.len()).collect();
    let mut jobs = Vec::new();
    for &classifier in &spec.classifiers {
        for repetition in 0..spec.repetitions {
            for fold in 0..spec.folds {
                if classifier == ClassifierKind::NaiveBayes {
                    // β only enters the score, so one fit serves the whole grid
                    jobs.push(Job {
                        classifier,
                        betas: all_betas.clone(),
                        repetition,
                        fold,
                    });
                } else {
                    for &b in &all_betas {
                        jobs.push(Job {
                            classifier,
                            betas: vec![b],
                            repetition,
                            fold,
                        });
                    }
                }
            }
        }
    }
    log::info!(
        "{} cells on {} samples ({} positive)",
        jobs.len(),
        data.len(),
        data.p_count()
    );

    let outputs = spec.train.exec.map(jobs.len(), |j| {
        let job = &jobs[j];
        let split = &splits[job.repetition][job.fold];
        let started = Instant::now();
        let records = run_job(spec, data, split, job);
        (records, started.elapsed())
    });

    let mut raw = Vec::new();
    let mut timings: Vec<(ClassifierKind, Duration)> = spec
        .classifiers
        .iter()
        .map(|&c| (c, Duration::ZERO))
        .collect();
    for ((records, elapsed), job) in outputs.into_iter().zip(&jobs) {
        if let Some(t) = timings.iter_mut().find(|(c, _)| *c == job.classifier) {
            t.1 += elapsed;
        }
        raw.extend(records);
    }
    let order = |r: &RawRecord| {
        let c = spec
            .classifiers
            .iter()
            .position(|&c| c == r.classifier)
            .unwrap_or(0);
        let b = spec.betas.iter().position(|&b| b == r.beta).unwrap_or(0);
        (c, b, r.repetition, r.fold)
    };
    raw.sort_by_key(order);
    for (c, t) in &timings {
        log::info!("{c}: {:.2} s of fit and predict time", t.as_secs_f64());
    }
    for r in raw.iter().filter(|r| r.outcome.is_err()) {
        log::warn!(
            "{} beta={} repetition {} fold {} failed: {}",
            r.classifier,
            r.beta,
            r.repetition,
            r.fold,
            r.outcome.as_ref().err().map_or("", String::as_str)
        );
    }
    let table = aggregate(spec, &raw);
    Ok(ExperimentResults {
        raw,
        table,
        timings,
    })
}

fn run_job(
    spec: &ExperimentSpec,
    data: &LabeledDataset,
    split: &Fold,
    job: &Job,
) -> Vec<RawRecord> {
    let train = data.subset(&split.train);
    let test = data.subset(&split.test);
    let record = |b: usize, outcome| RawRecord {
        classifier: job.classifier,
        beta: spec.betas[b],
        repetition: job.repetition,
        fold: job.fold,
        outcome,
    };
    let score = |preds: Result<Vec<Label>>, beta: f64| {
        preds
            .and_then(|p| confusion_from_predictions(test.labels(), &p))
            .and_then(|c| metrics_from_counts(&c, beta).map(|m| (c, m)))
            .map_err(|e| e.to_string())
    };
    match job.classifier {
        ClassifierKind::NaiveBayes => {
            let preds = naive_bayes_fit(&train).and_then(|m| m.predict_dataset(&test));
            job.betas
                .iter()
                .map(|&b| {
                    let outcome = match &preds {
                        Ok(p) => score(Ok(p.clone()), spec.betas[b]),
                        Err(e) => Err(e.to_string()),
                    };
                    record(b, outcome)
                })
                .collect()
        }
        ClassifierKind::Ofc => job
            .betas
            .iter()
            .map(|&b| {
                let beta = spec.betas[b];
                let mut cfg = spec.train.clone();
                if cfg.measure != Measure::Accuracy {
                    cfg.measure = Measure::FBeta { beta };
                }
                let preds = fit(&train, &cfg).and_then(|(m, trace)| {
                    log::debug!(
                        "ofc beta={beta} repetition {} fold {}: {} after {} iterations",
                        job.repetition,
                        job.fold,
                        trace.status,
                        trace.iterations()
                    );
                    m.predict_dataset(&test)
                });
                record(b, score(preds, beta))
            })
            .collect(),
        ClassifierKind::Oracle => job
            .betas
            .iter()
            .map(|&b| {
                let beta = spec.betas[b];
                let preds = threshold_oracle(&train, Objective::FBeta(beta), spec.oracle_steps)
                    .and_then(|r| r.rule.predict_dataset(&test));
                record(b, score(preds, beta))
            })
            .collect(),
    }
}

fn aggregate(spec: &ExperimentSpec, raw: &[RawRecord]) -> Vec<AggregateRow> {
    let mut table = Vec::new();
    for &classifier in &spec.classifiers {
        for &beta in &spec.betas {
            let cells: Vec<&RawRecord> = raw
                .iter()
                .filter(|r| r.classifier == classifier && r.beta == beta)
                .collect();
            let failed_folds = cells.iter().filter(|r| r.outcome.is_err()).count();
            let mut per_rep: [Vec<f64>; 4] = Default::default();
            for rep in 0..spec.repetitions {
                let ok: Vec<&MetricsReport> = cells
                    .iter()
                    .filter(|r| r.repetition == rep)
                    .filter_map(|r| r.outcome.as_ref().ok().map(|(_, m)| m))
                    .collect();
                if ok.is_empty() {
                    continue;
                }
                let n = ok.len() as f64;
                let fields: [fn(&MetricsReport) -> f64; 4] =
                    [|m| m.f_beta, |m| m.accuracy, |m| m.recall, |m| m.precision];
                for (slot, get) in per_rep.iter_mut().zip(fields) {
                    slot.push(ok.iter().map(|m| get(m)).sum::<f64>() / n);
                }
            }
            table.push(AggregateRow {
                classifier,
                beta,
                f_beta: MeanStd::of(&per_rep[0]),
                accuracy: MeanStd::of(&per_rep[1]),
                recall: MeanStd::of(&per_rep[2]),
                precision: MeanStd::of(&per_rep[3]),
                repetitions: per_rep[0].len(),
                failed_folds,
            });
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::Execution;

    fn tiny() -> LabeledDataset {
        let features = vec![0.0, 0.2, 0.4, 0.6, 0.8, 3.0, 3.2, 3.4, 3.6, 3.8];
        let labels = (0..10).map(|i| Label::from_bool(i >= 5)).collect();
        LabeledDataset::new(1, features, labels).unwrap()
    }

    #[test]
    fn parse_round_trip_of_keys() {
        let spec = ExperimentSpec::parse(
            "# comment\ndataset = db3\nclassifiers = ofc, nb\nrepetitions=2\nfolds=5\nbetas=0.2,1,1.8\nseed=7\nresolution=32\ntol=1e-4\n",
        )
        .unwrap();
        assert_eq!(spec.dataset, DatasetSpec::Db(3));
        assert_eq!(
            spec.classifiers,
            vec![ClassifierKind::Ofc, ClassifierKind::NaiveBayes]
        );
        assert_eq!(spec.betas, vec![0.2, 1.0, 1.8]);
        assert_eq!(spec.train.resolution, Some(vec![32]));
        assert_eq!(spec.train.seed, 7);
        assert!(ExperimentSpec::parse("bogus=1").is_err());
        assert!(ExperimentSpec::parse("repetitions=0").is_err());
        assert!(ExperimentSpec::parse("betas=1,-2").is_err());
        assert!(matches!(
            "db9".parse::<DatasetSpec>(),
            Err(Error::InvalidDatabase(9))
        ));
    }

    #[test]
    fn smoke_two_folds_one_repetition() {
        let spec = ExperimentSpec {
            classifiers: vec![ClassifierKind::NaiveBayes],
            repetitions: 1,
            folds: 2,
            ..Default::default()
        };
        let r = run_experiment_on(&spec, &tiny()).unwrap();
        assert_eq!(r.raw.len(), 2);
        assert_eq!(r.failures().count(), 0);
        assert_eq!(r.table.len(), 1);
        assert_eq!(r.table[0].f_beta.mean, 1.0);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        // the oracle rejects 2-D data; NB still runs
        let data = LabeledDataset::new(
            2,
            (0..40)
                .map(|i| (i % 7) as f64 + if i < 20 { 0.0 } else { 5.0 })
                .collect(),
            (0..20).map(|i| Label::from_bool(i < 10)).collect(),
        )
        .unwrap();
        let spec = ExperimentSpec {
            classifiers: vec![ClassifierKind::Oracle, ClassifierKind::NaiveBayes],
            repetitions: 1,
            folds: 2,
            ..Default::default()
        };
        let r = run_experiment_on(&spec, &data).unwrap();
        assert_eq!(r.failures().count(), 2);
        assert_eq!(r.row(ClassifierKind::Oracle, 1.0).unwrap().failed_folds, 2);
        assert_eq!(
            r.row(ClassifierKind::NaiveBayes, 1.0).unwrap().failed_folds,
            0
        );
    }

    #[test]
    fn table_is_recomputable_from_raw_rows() {
        let spec = ExperimentSpec {
            classifiers: vec![ClassifierKind::Oracle, ClassifierKind::NaiveBayes],
            repetitions: 3,
            folds: 4,
            betas: vec![0.5, 2.0],
            ..Default::default()
        };
        let data = gen_toy1d(5).subset(&(0..2000).chain(1000..1400).collect::<Vec<_>>());
        let r = run_experiment_on(&spec, &data).unwrap();
        assert_eq!(r.raw.len(), 2 * 2 * 3 * 4);
        for row in &r.table {
            let reps: Vec<f64> = (0..3)
                .map(|rep| {
                    let v: Vec<f64> = r
                        .raw
                        .iter()
                        .filter(|x| {
                            x.classifier == row.classifier
                                && x.beta == row.beta
                                && x.repetition == rep
                        })
                        .map(|x| x.outcome.as_ref().unwrap().1.f_beta)
                        .collect();
                    v.iter().sum::<f64>() / v.len() as f64
                })
                .collect();
            let m = MeanStd::of(&reps);
            assert!((m.mean - row.f_beta.mean).abs() < 1e-12);
            assert!((m.std - row.f_beta.std).abs() < 1e-12);
        }
    }

    #[test]
    fn sequential_and_parallel_runs_agree() {
        let mut spec = ExperimentSpec {
            classifiers: vec![ClassifierKind::Oracle, ClassifierKind::NaiveBayes],
            repetitions: 2,
            folds: 3,
            ..Default::default()
        };
        let data = gen_toy1d(9).subset(&(900..1600).collect::<Vec<_>>());
        let a = run_experiment_on(&spec, &data).unwrap();
        spec.train.exec = Execution::Sequential;
        let b = run_experiment_on(&spec, &data).unwrap();
        assert_eq!(a.raw, b.raw);
        assert_eq!(a.table, b.table);
    }

    #[test]
    fn mean_std() {
        let m = MeanStd::of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.std, 1.0);
        assert_eq!(MeanStd::of(&[4.0]).std, 0.0);
    }
}
