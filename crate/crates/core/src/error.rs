//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by model construction, validation, and sampling.
#[derive(Debug, Error)]
pub enum Error {
    /// A covariate cannot support the requested basis.
    #[error("degenerate covariate for term `{term}`: {reason}")]
    DegenerateCovariate { term: String, reason: String },

    /// Dimensions of two related objects disagree.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    /// A response value or observation failed validation.
    #[error("invalid data at row {row}: {reason}")]
    InvalidData { row: usize, reason: String },

    /// A scalar argument lies outside its domain.
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: String, reason: String },

    /// An adjacency structure is malformed.
    #[error("invalid adjacency: {0}")]
    InvalidAdjacency(String),

    /// A model specification is internally inconsistent.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A proposal precision matrix stayed non-positive-definite through
    /// the whole jitter escalation ladder.
    #[error("Cholesky factorization failed for block `{block}` after jitter escalation")]
    CholeskyFailure { block: String },

    /// A sampler quantity became non-finite.
    #[error("non-finite {what} in block `{block}`")]
    NonFinite { block: String, what: String },

    /// A chain produced a non-finite quantity and cannot continue.
    #[error("chain {chain} aborted at iteration {iteration} in `{block}`: {reason}")]
    ChainAbort {
        chain: usize,
        iteration: usize,
        block: String,
        reason: String,
    },
}

impl Error {
    /// True for errors caused by bad inputs rather than sampler breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::CholeskyFailure { .. } | Error::ChainAbort { .. } | Error::NonFinite { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
