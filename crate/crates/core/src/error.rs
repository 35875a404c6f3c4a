use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("need at least {needed} samples, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("cannot normalize a degenerate vector (norm {norm:e})")]
    DegenerateVector { norm: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("component {index}: {source}")]
    Component {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("linear solve failed: {0}")]
    SingularSystem(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}: row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        source_name: String,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{source_name}: row {row}, column {column}: cannot parse {value:?}")]
    NonNumeric {
        source_name: String,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{source_name}: row {row}, column {column}: value is not finite")]
    NonFinite {
        source_name: String,
        row: usize,
        column: usize,
    },

    #[error("test label {label} does not occur in the training set")]
    UnknownTestLabel { label: usize },

    #[error("{source_name}: malformed PGM: {reason}")]
    MalformedPgm { source_name: String, reason: String },

    #[error("{source_name}: image is {found:?} (width, height), expected {expected:?}")]
    ImageSizeMismatch {
        source_name: String,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("cannot derive a class label from file name {0:?}")]
    BadLabel(String),

    #[error("malformed report: {0}")]
    MalformedReport(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
