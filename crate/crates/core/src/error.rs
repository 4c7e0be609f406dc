use thiserror::Error;

use crate::spectral::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The loop has no dispersive imbalance, so no detuning routes pairs.
    #[error("no switching possible: {0}")]
    NoSwitching(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("root not bracketed on [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("degenerate fit: {0}")]
    FitDegenerate(String),

    /// Carries the best parameters seen before giving up.
    #[error("fit did not converge after {iterations} iterations")]
    MaxIterations {
        iterations: usize,
        best: Box<FitResult>,
    },
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {value}")))
    }
}
