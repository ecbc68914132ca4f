use serde::Serialize;
use thiserror::Error;

/// Failures raised by the numerical pipeline. Serializes as
/// `{"kind": ..., "detail": ...}`.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", content = "detail")]
pub enum Error {
    #[error("Frenet frame undefined at s = {s:.6}: |R' x R''| = {cross_norm:.3e}")]
    DegenerateFrame { s: f64, cross_norm: f64 },

    #[error("grid mismatch: expected {expected} samples, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge within {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("spectral gap {gap:.4} fell below {threshold:.4}")]
    GapCollapse { gap: f64, threshold: f64 },

    #[error("overlap magnitude {overlap:.4} below {min:.4}; refine the loop")]
    OverlapTooSmall { overlap: f64, min: f64 },

    #[error("transport matrix is nearly singular (smallest singular value {singular_value:.3e})")]
    NonUnitarizable { singular_value: f64 },

    #[error("norm drifted by {drift:.3e} at t = {time:.4}")]
    NormDrift { drift: f64, time: f64 },

    #[error("instantaneous ground-state population {population:.6} at t = {time:.4}")]
    AdiabaticityLoss { population: f64, time: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Errors caused by the numerics (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidInput(_) | Error::GridMismatch { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
