use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver, the measures and the data layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input must contain both positive and negative examples")]
    SingleClassInput,

    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "solver did not converge after {iterations} iterations (max KKT violation {violation:e})"
    )]
    ConvergenceFailure { iterations: usize, violation: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid label {0}, expected -1 or +1")]
    InvalidLabel(i64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("delta must lie strictly between 0 and 1, got {0}")]
    InvalidDelta(f64),

    #[error("sequence of length {size} is too large for exhaustive enumeration (max {max})")]
    TooLarge { size: usize, max: usize },

    #[error("sample contains duplicate examples")]
    DuplicateExamples,

    #[error("too many new points for joint prediction: {k} (max {max})")]
    TooManyNewPoints { k: usize, max: usize },

    #[error("new point is a support vector in neither picture (solver tolerance failure)")]
    LemmaTwoViolation,

    #[error("internal error: {0}")]
    Internal(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("test point {id} has no label")]
    MissingLabel { id: usize },

    #[error("cannot split dataset: {0}")]
    Split(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse grouping used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad configuration or arguments.
    Usage,
    /// Malformed or unsuitable input data.
    Data,
    /// The numerics failed (non-convergence, broken invariants).
    Numerical,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidConfig(_)
            | Error::InvalidDelta(_)
            | Error::TooLarge { .. }
            | Error::TooManyNewPoints { .. } => ErrorCategory::Usage,
            Error::SingleClassInput
            | Error::DimensionMismatch { .. }
            | Error::EmptyInput
            | Error::InvalidLabel(_)
            | Error::DuplicateExamples
            | Error::Parse { .. }
            | Error::MissingLabel { .. }
            | Error::Split(_)
            | Error::Io(_) => ErrorCategory::Data,
            Error::ConvergenceFailure { .. } | Error::LemmaTwoViolation | Error::Internal(_) => {
                ErrorCategory::Numerical
            }
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
