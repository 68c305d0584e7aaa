use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular element: pivot {pivot:e} below threshold {threshold:e}")]
    Singular { pivot: f64, threshold: f64 },
    #[error("inverse residual {residual:e} exceeds tolerance {tol:e}")]
    Inaccurate { residual: f64, tol: f64 },
    #[error("index {index} outside tabulated window [{lo}, {hi}]")]
    OutOfWindow { index: String, lo: String, hi: String },
    #[error("symbol evaluated at z = 0 with negative indices present")]
    ZeroArgument,
    #[error("symbol not invertible on the torus: {0}")]
    NotInvertibleOnTorus(String),
    #[error("1 + f^ not invertible on the imaginary axis at y = {0}")]
    NotInvertibleOnAxis(f64),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("sequence too short for a tail fit (need {needed} significant entries per side)")]
    TooShort { needed: usize },
    #[error("rate out of range: {0}")]
    RateOutOfRange(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
