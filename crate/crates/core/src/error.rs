use thiserror::Error;

/// Errors produced by the factorizations, the truncation solver and the
/// pipelines built on top of them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("condition bound must be a finite value >= 1, got {0}")]
    InvalidKappa(f64),

    #[error("the zero matrix has no positive definite approximation with bounded condition number")]
    InfeasibleZeroMatrix,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidKappa(kappa))
    }
}
