use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },

    #[error("cut has no nonzero coefficient and a zero right-hand side")]
    AllZeroCut,

    #[error("ground set of size {size} exceeds the limit of {limit} for this operation")]
    GroundSetTooLarge { size: usize, limit: usize },

    #[error("set function domain error: {0}")]
    Domain(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("risk level {0} is outside (0, 1)")]
    RiskOutOfRange(Box<Rational>),

    #[error("instance has no scenario probabilities")]
    MissingProbabilities,

    #[error("operation requires zero lower bounds; reduce the instance first")]
    LowerBoundsNotReduced,

    #[error("point violates the linking constraint: sum of y is {sum}, epsilon is {epsilon}")]
    EpsilonViolated { sum: Box<Rational>, epsilon: Box<Rational> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("condition violated at scenario {index}: {reason}")]
    ConditionViolated { index: usize, reason: String },

    #[error("no strategy named {0:?}")]
    UnknownStrategy(String),

    #[error("internal invariant broken: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
