use thiserror::Error;

/// Errors raised by the network model, solvers and transport routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PstError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("step size too large: {0}")]
    StepSize(String),

    #[error("synthesis residual {residual:e} exceeds tolerance {tolerance:e}: {detail}")]
    ResidualTooLarge {
        residual: f64,
        tolerance: f64,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, PstError>;

pub(crate) fn invalid(msg: impl Into<String>) -> PstError {
    PstError::InvalidParameter(msg.into())
}
