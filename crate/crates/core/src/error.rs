use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grade mismatch: expected {expected}, got {got}")]
    GradeMismatch { expected: usize, got: usize },

    #[error("grade overflow: {j} + {k} exceeds ambient dimension {d}")]
    GradeOverflow { j: usize, k: usize, d: usize },

    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),

    #[error("ambient dimension {0} exceeds the supported maximum of {max}", max = crate::algebra::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("exact {what} is not available for grade {k} in dimension {d}")]
    UnsupportedExact { what: &'static str, d: usize, k: usize },

    #[error("capability mismatch: {0}")]
    Capability(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("training diverged at epoch {epoch}: {reason}")]
    Divergence { epoch: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
