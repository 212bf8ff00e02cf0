use thiserror::Error;

use crate::models::Violation;

/// Errors raised by the samplers, simulators and validation helpers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (failing pivot {pivot}, max jitter {max_jitter:e})")]
    NotPositiveDefinite { pivot: usize, max_jitter: f64 },

    #[error("anchor index {anchor} out of range for {n} sites")]
    AnchorOutOfRange { anchor: usize, n: usize },

    #[error("invalid model: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("empty input")]
    EmptyInput,

    #[error("too few samples: need at least {min}, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
