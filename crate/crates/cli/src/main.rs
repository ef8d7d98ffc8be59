//! `lsfb`: generate data, train level-set F-beta classifiers and run
//! cross-validated experiments from the command line.

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use levelset_fbeta::classifier::{fit, load_model, save_model, zero_set};
use levelset_fbeta::data::load_points;
use levelset_fbeta::field::{write_field, write_pgm};
use levelset_fbeta::harness::{run_experiment, ClassifierKind, DatasetSpec, ExperimentSpec};
use levelset_fbeta::solver::TrainConfig;
use levelset_fbeta::ErrorKind;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(
    name = "lsfb",
    version,
    about = "Level-set classifiers that maximize F-beta"
)]
struct Cli {
    /// Seed for data generation and fold shuffles [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Log more (-v info, -vv debug); logs go to stderr
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset as CSV (features, then a 0/1 label)
    Gen {
        /// toy, disjoint or db1..db4
        #[arg(long)]
        dataset: DatasetSpec,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a classifier and write the model file
    Train {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        model: PathBuf,
        /// Per-iteration energy and update size as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Label the rows of a CSV with a trained model
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// The input has a trailing label column to ignore
        #[arg(long)]
        labelled: bool,
        /// The input has no header row
        #[arg(long)]
        no_header: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a cross-validation experiment described by a key=value file
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Aggregated table (mean and std per classifier and beta)
        #[arg(long)]
        out: PathBuf,
        /// Per-fold rows the table is computed from
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Cross-validated F-beta of each classifier over a grid of betas
    SweepBeta {
        #[arg(long)]
        dataset: DatasetSpec,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.2,0.4,0.6,0.8,1.0,1.2,1.4,1.6,1.8"
        )]
        betas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "ofc,nb")]
        classifiers: Vec<ClassifierKind>,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Write the zero level set of a model as CSV
    Frontier {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the decision field of a model
    Field {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Output format; `auto` picks from the file extension
        #[arg(long, value_enum, default_value_t = FieldFormat::Auto)]
        format: FieldFormat,
    },
}

#[derive(clap::Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Labelled CSV with a header row and the label last (1 = positive)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Built-in dataset: toy, disjoint, db1..db4, csv:<path> or skin:<path>
    #[arg(long)]
    dataset: Option<DatasetSpec>,
}

#[derive(clap::Args, Debug)]
struct TrainArgs {
    /// f-beta:<beta>, f1 or accuracy
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    /// Cells per axis
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Any training key, e.g. --set eps_h=0.02 --set descent=G
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FieldFormat {
    Auto,
    Pgm,
    Csv,
    Text,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(PathBuf, io::Error),
    Core(levelset_fbeta::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Failure::Core(e) => e.fmt(f),
        }
    }
}

impl From<levelset_fbeta::Error> for Failure {
    fn from(e: levelset_fbeta::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(..) => 2,
            Failure::Core(e) => match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            },
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match cli.command {
        Command::Gen { dataset, out } => {
            let data = dataset.load(seed)?;
            write_to(&out, |w| data.write_csv(w))
        }
        Command::Train {
            source,
            train,
            model,
            trace,
        } => {
            let data = match (source.data, source.dataset) {
                (Some(path), _) => DatasetSpec::Csv(path).load(seed)?,
                (None, Some(spec)) => spec.load(seed)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            let mut cfg = TrainConfig {
                seed,
                ..Default::default()
            };
            train.apply(&mut cfg)?;
            let started = Instant::now();
            let (m, tr) = fit(&data, &cfg)?;
            log::info!(
                "trained in {:.2?} ({}, {} iterations)",
                started.elapsed(),
                tr.status,
                tr.iterations()
            );
            if m.is_degenerate() {
                log::warn!(
                    "the trained field has one sign everywhere; every point gets the same label"
                );
            }
            save_model(&model, &m)?;
            match trace {
                Some(path) => write_to(&path, |w| tr.write_csv(w)),
                None => Ok(()),
            }
        }
        Command::Predict {
            model,
            data,
            labelled,
            no_header,
            out,
        } => {
            let m = load_model(&model)?;
            let (width, values) = load_points(&data, !no_header)?;
            let dim = if labelled { width - 1 } else { width };
            let points: Vec<f64> = if labelled {
                values
                    .chunks_exact(width)
                    .flat_map(|row| row[..dim].iter().copied())
                    .collect()
            } else {
                values
            };
            let predictions = points
                .chunks_exact(dim)
                .map(|p| m.predict(p))
                .collect::<levelset_fbeta::Result<Vec<_>>>()?;
            write_to(&out, |w| {
                writeln!(w, "row,label,value")?;
                for (i, p) in predictions.iter().enumerate() {
                    writeln!(w, "{i},{},{}", p.label.as_digit(), p.value)?;
                }
                Ok(())
            })
        }
        Command::Eval { config, out, raw } => {
            let text = fs::read_to_string(&config).map_err(|e| Failure::Io(config.clone(), e))?;
            let mut spec = ExperimentSpec::parse(&text)?;
            if let Some(s) = cli.seed {
                spec.set("seed", &s.to_string())?;
            }
            experiment(&spec, &out, raw.as_deref())
        }
        Command::SweepBeta {
            dataset,
            betas,
            classifiers,
            repetitions,
            folds,
            train,
            out,
            raw,
        } => {
            let mut spec = ExperimentSpec {
                dataset,
                classifiers,
                repetitions,
                folds,
                betas,
                ..Default::default()
            };
            spec.set("seed", &seed.to_string())?;
            train.apply(&mut spec.train)?;
            spec.validate()?;
            experiment(&spec, &out, raw.as_deref())
        }
        Command::Frontier { model, out } => {
            let m = load_model(&model)?;
            let f = zero_set(m.field())?;
            write_to(&out, |w| f.write_csv(w))
        }
        Command::Field { model, out, format } => {
            let m = load_model(&model)?;
            let format = match format {
                FieldFormat::Auto => match out.extension().and_then(|e| e.to_str()) {
                    Some("pgm") => FieldFormat::Pgm,
                    Some("csv") => FieldFormat::Csv,
                    _ => FieldFormat::Text,
                },
                f => f,
            };
            let u = m.field();
            match format {
                FieldFormat::Pgm => {
                    let mut buf = Vec::new();
                    write_pgm(&mut buf, u)?;
                    write_to(&out, |w| w.write_all(&buf))
                }
                FieldFormat::Csv => write_to(&out, |w| {
                    let g = u.grid();
                    let header: Vec<String> = (0..g.dim()).map(|a| format!("x{a}")).collect();
                    writeln!(w, "{},value", header.join(","))?;
                    for (k, v) in u.values().iter().enumerate() {
                        for x in g.node_point(k) {
                            write!(w, "{x},")?;
                        }
                        writeln!(w, "{v}")?;
                    }
                    Ok(())
                }),
                _ => write_to(&out, |w| write_field(w, u)),
            }
        }
    }
}

impl TrainArgs {
    fn apply(&self, cfg: &mut TrainConfig) -> Outcome {
        let mut pairs: Vec<(String, String)> = Vec::new();
        if let Some(m) = &self.measure {
            pairs.push(("measure".into(), m.clone()));
        }
        if let Some(b) = self.beta {
            pairs.push(("beta".into(), b.to_string()));
        }
        if let Some(r) = self.resolution {
            pairs.push(("resolution".into(), r.to_string()));
        }
        if let Some(n) = self.max_iter {
            pairs.push(("max_iter".into(), n.to_string()));
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            pairs.push((k.trim().into(), v.trim().into()));
        }
        for (k, v) in pairs {
            if !cfg.set(&k, &v)? {
                return Err(Failure::Usage(format!("unknown training key '{k}'")));
            }
        }
        cfg.validate()?;
        Ok(())
    }
}

fn experiment(spec: &ExperimentSpec, out: &Path, raw: Option<&Path>) -> Outcome {
    let results = run_experiment(spec)?;
    for (kind, t) in &results.timings {
        log::info!("{kind}: {t:.2?} total");
    }
    let failed = results.failures().count();
    if failed > 0 {
        log::warn!("{failed} cells failed; see the error column of the raw output");
    }
    write_to(out, |w| results.write_table_csv(w))?;
    match raw {
        Some(path) => write_to(path, |w| results.write_raw_csv(w)),
        None => Ok(()),
    }
}

/// Creates `path` and hands a buffered writer to `f`.
fn write_to(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Outcome {
    let io = |e| Failure::Io(path.to_path_buf(), e);
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(io)?;
    w.flush().map_err(io)
}
