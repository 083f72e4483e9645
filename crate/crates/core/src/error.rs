use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bit string length {found} does not match arity {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("arity {0} is outside the supported range")]
    ArityOutOfRange(usize),

    #[error("on-set size {m} is outside 1..={max} for arity {n}")]
    OnsetOutOfRange { n: usize, m: u64, max: u64 },

    #[error("on-set must be nonempty")]
    EmptyOnset,

    #[error("invalid bit string {0:?}")]
    InvalidBitString(String),

    #[error("malformed truth-table file: {0}")]
    TruthTableFormat(String),

    #[error("argument {name}={value} is outside the valid range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("relation has a zero weight sum for {side} element {index}")]
    ZeroDenominator { side: &'static str, index: usize },

    #[error("relation has no weighted pairs")]
    EmptyRelation,

    #[error("relation member {bits} has f = {value}, expected {expected}")]
    RelationMismatch {
        bits: String,
        value: bool,
        expected: bool,
    },

    #[error("register dimension {found} does not match oracle length {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("search domain is empty")]
    EmptyDomain,

    #[error("M out of supported range: beta' = {beta:.4} >= 1")]
    BetaOutOfRange { beta: f64 },

    #[error("Gram matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("Gram matrix of size {size} exceeds the limit {limit}; use a smaller on-set")]
    GramTooLarge { size: usize, limit: usize },

    #[error("on-set members {0} and {1} have |overlap| = 1 and cannot be discriminated")]
    IndistinguishableOnset(String, String),

    #[error("parameters outside claim regime: {0}")]
    OutsideRegime(String),

    #[error("candidate set is empty")]
    NoCandidates,
}

pub type Result<T> = std::result::Result<T, Error>;
