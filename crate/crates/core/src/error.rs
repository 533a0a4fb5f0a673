use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("risk level must lie in (0, 1), got {0}")]
    InvalidRiskLevel(f64),

    #[error("test level must lie in (0, 0.5), got {0}")]
    InvalidTestLevel(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid scoring specification: {0}")]
    InvalidScoringSpec(String),

    #[error("input shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("need at least {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("degenerate score-difference series: estimated standard deviation is zero")]
    DegenerateSeries,

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
