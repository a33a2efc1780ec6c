use alloc::string::String;
use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("points are antipodal (distance {distance} within tolerance of pi)")]
    Antipodal { distance: f64 },
    #[error("pair at distance {distance} is beyond the admissible cut {cut}")]
    CutLocus { distance: f64, cut: f64 },
    #[error("gradient norm {norm} is outside the admissible ball of radius {limit}")]
    GradientOutOfRange { norm: f64, limit: f64 },
    #[error("c-segment endpoint is the antipode of the base point")]
    AntipodalEndpoint,
    #[error("axis is degenerate (norm {norm})")]
    DegenerateAxis { norm: f64 },
    #[error("unsupported dimension {0}: the ambient dimension must be at least 3")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("no convergence after {iterations} iterations (residual {residual})")]
    NonConvergence { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
