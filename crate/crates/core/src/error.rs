use thiserror::Error;

use crate::solvers::Diagnostics;

pub type Result<T> = std::result::Result<T, RksError>;

#[derive(Debug, Error)]
pub enum RksError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown quadrature rule `{0}`")]
    UnknownRule(String),

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("point {point:?} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { point: Vec<f64>, lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("asymmetric input: {0}")]
    Asymmetric(String),

    #[error("kernels of the two functions differ")]
    KernelMismatch,

    #[error("singular system: {0}")]
    Singular(String),

    #[error("solver did not converge after {} iterations (gradient norm {:e})", .0.iterations, .0.gradient_norm)]
    NotConverged(Box<Diagnostics>),

    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RksError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        RksError::InvalidArgument(msg.into())
    }
}
