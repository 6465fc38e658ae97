use thiserror::Error;

use crate::model::ValidationError;
use crate::numkit::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },
    #[error("subspace is not contained in the support (residual {residual:e})")]
    NotContained { residual: f64 },
    #[error("split produced {got} directions, expected {expected}")]
    RankDeficient { expected: usize, got: usize },
    #[error("index {index} out of range for {len} states")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Gram matrix is not positive definite (min eigenvalue {min_eig:e})")]
    GramNotPositiveDefinite { min_eig: f64 },
    #[error("core of state {index} is zero; the instance is not discriminable")]
    EmptyBlock { index: usize },
    #[error("block sizes do not match: {0}")]
    BlockMismatch(String),
    #[error("grid search guard exceeded: {0}")]
    GridTooLarge(String),
    #[error("solution violates its certificates (min eigenvalue {min_eig:e})")]
    InfeasibleSolution { min_eig: f64 },
    #[error("POVM is incomplete (||sum - I|| = {residual:e})")]
    IncompletePovm { residual: f64 },
    #[error("outcome probabilities for state {state} sum to {sum}")]
    ProbabilitySum { state: usize, sum: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
