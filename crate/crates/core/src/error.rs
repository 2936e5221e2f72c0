use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no convergence after {terms} terms: {what}")]
    NonConvergence { what: String, terms: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degree {n} out of range 0..={max}")]
    DegreeOutOfRange { n: usize, max: usize },

    #[error("ill-conditioned polynomial fit: residual {residual:e} exceeds {tolerance:e}")]
    IllConditioned { residual: f64, tolerance: f64 },

    #[error("eigensolver failed: {0}")]
    EigensolveFailure(String),

    #[error("truncation dimension {dim} too small, need at least {needed}")]
    TruncationTooSmall { dim: usize, needed: usize },

    #[error("ratio denominator vanishes at x = {x}")]
    DegenerateRatio { x: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
