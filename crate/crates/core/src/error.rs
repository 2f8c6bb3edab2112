use thiserror::Error;

/// Errors raised by the laboratory's operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid problem context: {0}")]
    InvalidContext(String),

    #[error("invalid target function: {0}")]
    InvalidFunction(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("{what} has {size} elements, exceeding the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: String,
        cap: u128,
    },

    #[error("decode error: {0}")]
    Decode(String),

    #[error("function class is empty")]
    EmptyClass,

    #[error("optimiser `{label}` chose already visited point {point}")]
    Revisit { label: String, point: usize },

    #[error("function has no maximum outside the first point")]
    NoMaxOutsideFirst,

    #[error("need {needed} incompressible points outside the first point, found {found}")]
    NotEnoughIncompressible { needed: usize, found: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("distribution is block uniform; no witness pair exists")]
    BlockUniform,

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
