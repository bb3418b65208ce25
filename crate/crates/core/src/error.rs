//! Shared error type for all solver modules.

use thiserror::Error;

/// Errors reported by parsers, solvers, and compilers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Input text could not be parsed; positions are 1-based.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// Division by an exact zero.
    #[error("division by zero")]
    DivisionByZero,

    /// A vector or system had the wrong dimension.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An enumeration would exceed its configured budget.
    #[error("budget exceeded: {what} would require {needed} > limit {limit}")]
    BudgetExceeded { what: String, needed: u128, limit: u128 },

    /// Input violates a structural precondition of the requested operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A clause is not Horn (negative coefficients in more than one column).
    #[error("clause is not Horn: {0}")]
    NotHorn(String),

    /// A formula is not restricted Horn (more than one literal with a
    /// negative coefficient in some clause).
    #[error("formula is not restricted Horn: {0}")]
    NotRestrictedHorn(String),

    /// A clause is not tropically convex (some literal's coefficients do not
    /// sum to zero, or the clause is not Horn).
    #[error("clause is not tropically convex: {0}")]
    NotTropical(String),

    /// The averaging weights of a tropically convex clause are not
    /// representable with dyadic denominators, so no finite S3 tree exists.
    #[error("non-dyadic averaging weights: {0}")]
    NonDyadicWeights(String),

    /// A game was malformed (probabilities, out-degrees, payoffs).
    #[error("invalid game: {0}")]
    InvalidGame(String),

    /// Two routes that must agree disagreed; indicates a solver bug.
    #[error("internal consistency violation: {0}")]
    InternalInconsistency(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
