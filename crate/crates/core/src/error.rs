use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which class a density/data error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassTag {
    Positive,
    Negative,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassTag::Positive => f.write_str("positive class"),
            ClassTag::Negative => f.write_str("negative class"),
        }
    }
}

/// Coarse grouping used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("point {point:?} lies outside the grid bounds")]
    OutOfDomain { point: Vec<f64> },
    #[error("invalid initial shape: {0}")]
    InvalidShape(String),
    #[error("fields are defined on different grids")]
    GridMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("grid misses all sample mass (integral {0:e})")]
    EmptyMass(f64),
    #[error("{class}: {source}")]
    Class {
        class: ClassTag,
        #[source]
        source: Box<Error>,
    },
    #[error("confusion counts are all zero")]
    EmptyConfusion,
    #[error("length mismatch: {left} labels vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },
    #[error("decision field excludes all positive mass")]
    VanishingPositiveMass,
    #[error("update of {change:.3e} exceeds the step limit {limit:.3e}")]
    StepRejected { change: f64, limit: f64 },
    #[error("model is degenerate: every node has the same sign")]
    DegenerateModel,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("unsupported format version {found} (this build reads up to {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("input is empty")]
    EmptyInput,
    #[error("unknown database id {0} (expected 1-4)")]
    InvalidDatabase(u32),
    #[error("{class} has {have} samples, fewer than the {need} folds requested")]
    InsufficientClassSamples {
        class: ClassTag,
        have: usize,
        need: usize,
    },
    #[error("operation requires {expected}-dimensional data, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn tagged(self, class: ClassTag) -> Self {
        Error::Class {
            class,
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Class { source, .. } => source.kind(),
            Error::Config(_) | Error::InvalidDatabase(_) => ErrorKind::Usage,
            Error::EmptyMass(_)
            | Error::VanishingPositiveMass
            | Error::StepRejected { .. }
            | Error::DegenerateModel => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}
