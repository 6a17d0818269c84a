//! Error taxonomy shared by every layer of the crate.
//!
//! The variants are deliberately coarse: callers dispatch on *kind*, the
//! payload is a human-readable explanation. `PrecisionInconclusive` is the
//! honest "cannot decide at precision N" outcome and is never conflated
//! with a definite yes/no answer.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The element has no inverse at the working precision.
    #[error("not a unit: {0}")]
    NotAUnit(String),

    /// The question cannot be decided at the working precision.
    #[error("inconclusive at working precision: {0}")]
    PrecisionInconclusive(String),

    /// Operands disagree in prime, precision, variable count or degree bound.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Root-of-unity or character levels are incompatible.
    #[error("level mismatch: {0}")]
    LevelMismatch(String),

    /// A substitution image does not lie in the maximal ideal.
    #[error("substitution image {index} has a unit constant term")]
    NotContinuous { index: usize },

    /// A group word that must avoid the Frattini subgroup failed to.
    #[error("group word is a p-th power: {0}")]
    NotPrimitive(String),

    /// The degree bound is too small to hold the result faithfully.
    #[error("degree bound exceeded: {0}")]
    DegreeOverflow(String),

    /// Enumeration would exceed the configured work budget.
    #[error("enumeration of {needed} points exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    /// A quotient of ideals that must be integral is not.
    #[error("not divisible: {0}")]
    NonDivisible(String),

    /// A Galois-packet product failed to land in Z_p.
    #[error("result is not rational: {0}")]
    NotRational(String),

    /// Expression text failed to parse; `offset` is a byte offset.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    /// A variable or generator index is out of range.
    #[error("index {index} out of range (1..={nvars})")]
    Index { index: usize, nvars: usize },

    /// A numeric argument is outside its documented range.
    #[error("out of range: {0}")]
    Range(String),

    /// Structured input failed a well-formedness check.
    #[error("validation failed: {0}")]
    Validation(String),

    /// Relative-primality testing needs a candidate factor basis here.
    #[error("no candidate factor basis supplied and no general gcd is available")]
    IncompleteFactorBasis,

    /// A fitted sequence did not stabilize over the sampled range.
    #[error("sequence did not stabilize: {0}")]
    NotStabilized(String),

    /// An argument that must be nonzero at the working precision is zero.
    #[error("zero input: {0}")]
    ZeroInput(String),

    /// A scenario or configuration file is malformed.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
