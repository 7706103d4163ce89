//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by geometry construction, map building, and the solver.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid array or scenario configuration (non-coprime pair, bad sizes, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// Operands with incompatible dimensions.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A matrix that must have full numerical rank does not.
    #[error("numerical rank deficiency: {0}")]
    NumericalRank(String),

    /// Prior-knowledge parameters outside their valid domain.
    #[error("invalid prior knowledge: {0}")]
    InvalidPrior(String),

    /// An operation that needs at least one input element received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
