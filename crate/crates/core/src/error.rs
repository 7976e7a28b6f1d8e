use thiserror::Error;

use crate::lattice::IntVector;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular (determinant 0)")]
    SingularMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires dimension {expected}, matrix has dimension {got}")]
    DimensionError { expected: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("digit set has {got} digits but |det A| = {expected}")]
    WrongCount { expected: String, got: usize },

    #[error("digits {first} and {second} lie in the same coset of Z^n/A(Z^n)")]
    DuplicateCoset { first: IntVector, second: IntVector },

    #[error("digit set does not contain the zero vector")]
    MissingZero,

    #[error("matrix is not a dilation matrix (some eigenvalue has |lambda| <= 1)")]
    NotDilation,

    #[error("digit expansion neither terminated nor cycled within {0} steps")]
    StepBudgetExceeded(usize),

    #[error("expansion did not terminate; nothing to reconstruct")]
    NotTerminated,

    #[error("resource limit exceeded: {what} needs {needed} items, cap is {cap}")]
    ResourceLimit { what: &'static str, needed: String, cap: u64 },

    #[error("no beta <= {0} gives a radix representation")]
    NoBetaFound(u32),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
