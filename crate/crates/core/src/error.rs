use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}, column {column}: non-numeric value {value:?}")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("invalid label {value:?} at row {row}: expected -1/+1 or 0/1")]
    InvalidLabel { row: usize, value: String },

    #[error("dataset has a single class; both -1 and +1 labels are required")]
    SingleClass,

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not draw a split with both classes in every part after {attempts} attempts")]
    SplitUnsatisfiable { attempts: usize },

    #[error(
        "restricted master did not converge after {iterations} iterations \
         (gap {gap:.3e}, feasibility residual {feasibility:.3e})"
    )]
    SolverIterationLimit {
        iterations: usize,
        gap: f64,
        feasibility: f64,
    },

    #[error("column generation iteration {iteration}: {source}")]
    Training {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("wilcoxon test needs at least 5 non-zero differences, got {0}")]
    TooFewDifferences(usize),

    #[error("model file line {line}: {message}")]
    Model { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical core, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::SolverIterationLimit { .. } => true,
            Error::Training { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
