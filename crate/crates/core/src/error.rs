use thiserror::Error;

use crate::quantum::Basis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QkdError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid attack parameters: {0}")]
    InvalidAttack(String),

    #[error("probability {name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error(
        "insufficient sifted data in the {basis} subset: {available} available, {required} required"
    )]
    InsufficientSample {
        basis: Basis,
        available: usize,
        required: usize,
    },

    #[error("invalid hash dimensions: n = {n}, k = {k} (need 1 <= k <= n)")]
    InvalidHashDimensions { n: usize, k: usize },

    #[error("invalid hex bit string: {0}")]
    InvalidHex(String),
}

pub type Result<T> = std::result::Result<T, QkdError>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(QkdError::InvalidProbability { name, value })
    }
}
