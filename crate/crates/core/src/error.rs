use thiserror::Error;

pub type Result<T> = std::result::Result<T, CcaError>;

#[derive(Debug, Error)]
pub enum CcaError {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (relative off-diagonal residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("trial {trial} failed: {source}")]
    TrialFailed {
        trial: u64,
        #[source]
        source: Box<CcaError>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("objective is not finite at {0:?}")]
    NonFiniteObjective(Vec<f64>),

    #[error("malformed spectra input: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CcaError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        CcaError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
