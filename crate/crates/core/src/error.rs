use thiserror::Error;

/// Errors raised by the physics core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("ill-conditioned kernel: singular value {value:e} within a factor 100 of tolerance {tolerance:e}")]
    IllConditioned { value: f64, tolerance: f64 },

    #[error("step size underflow at t = {t:e}")]
    StepUnderflow { t: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
