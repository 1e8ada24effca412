use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Raised by a right-hand side when it is evaluated outside its domain.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}")]
pub struct DomainError {
    pub message: String,
}

impl DomainError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{field}: expected length {expected}, found {found}")]
    Dimension {
        field: String,
        expected: usize,
        found: usize,
    },

    #[error("{field}: non-finite coefficient")]
    NonFinite { field: String },

    #[error("weights for y''' sum to {sum}, not 1 (first-order consistency)")]
    Inconsistent { sum: f64 },

    #[error("row {row} of A sums to {sum}, but c[{row}] = {c}")]
    RowSum { row: usize, sum: f64, c: f64 },

    #[error("tableau '{0}' is not explicit")]
    NotExplicit(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: field '{field}': {message}")]
    Schema {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("non-finite state at step {step} (x = {x})")]
    Divergence { step: usize, x: f64 },

    #[error("right-hand side undefined at x = {x}: {source}")]
    Domain {
        x: f64,
        #[source]
        source: DomainError,
    },

    #[error("error {0:e} is at or below the roundoff floor; order undefined")]
    UndefinedOrder(f64),

    #[error("run at h = {h} failed: {source}")]
    StudyFailed {
        h: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}
