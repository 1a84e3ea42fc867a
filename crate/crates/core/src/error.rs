use thiserror::Error;

/// Errors raised by the solvers and operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CbfError {
    #[error("grid mismatch: expected n={expected_n}, L={expected_len}, got n={got_n}, L={got_len}")]
    GridMismatch {
        expected_n: usize,
        expected_len: f64,
        got_n: usize,
        got_len: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported absorption exponent r={0} (expected 1, 2 or 3)")]
    UnsupportedExponent(u32),

    #[error("operation requires {0}")]
    Precondition(String),

    #[error("misaligned time series: expected {expected} samples, got {got}")]
    Misaligned { expected: usize, got: usize },

    #[error("numerical blowup at step {step} (norm {norm:e})")]
    Blowup { step: usize, norm: f64 },
}

pub type Result<T> = std::result::Result<T, CbfError>;
