use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum SteerError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs disagree on a dimension (measurement count, matrix size).
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// A request would exceed a hard resource guard.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {message} (primal residual {primal_residual:.3e}, dual residual {dual_residual:.3e})")]
    Numeric {
        message: String,
        primal_residual: f64,
        dual_residual: f64,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SteerError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        SteerError::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        SteerError::Numeric {
            message: msg.into(),
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
        }
    }
}

pub type Result<T> = std::result::Result<T, SteerError>;
