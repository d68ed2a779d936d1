use thiserror::Error;

use crate::rational::{ParseRationalError, Rational};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("agent {agent} out of range for a graph on {n} agents")]
    AgentOutOfRange { agent: usize, n: usize },
    #[error("edge {src}->{dst}: self-loops are not allowed")]
    SelfLoop { src: usize, dst: usize },
    #[error("edge {src}->{dst} appears more than once")]
    DuplicateEdge { src: usize, dst: usize },
    #[error("edge {src}->{dst}: weight {weight} outside [-1, 1]")]
    WeightOutOfRange { src: usize, dst: usize, weight: Rational },
    #[error("value {0} outside [-1, 1]")]
    ValueOutOfRange(Rational),
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(Rational),
    #[error("probability {value} for agent {agent} outside [0, 1]")]
    InvalidProbability { agent: usize, value: Rational },
    #[error("not a permutation of 0..{n}")]
    NotAPermutation { n: usize },
    #[error("size mismatch: expected {expected} agents, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("{what}: n = {n} exceeds the limit of {limit}")]
    TooLarge { what: &'static str, n: usize, limit: usize },
    #[error("beta = alpha - delta/n = {beta} must be positive (requires delta < alpha*n)")]
    BetaNotPositive { beta: Rational },
    #[error("agent {agent} has out-degree {degree}, above the cap delta = {delta}")]
    DegreeExceedsCap { agent: usize, degree: usize, delta: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unknown mechanism {0:?}")]
    UnknownMechanism(String),
    #[error(transparent)]
    ParseRational(#[from] ParseRationalError),
    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// Whether the error reflects a mechanism precondition (rather than bad input).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::BetaNotPositive { .. } | Error::DegreeExceedsCap { .. } | Error::TooLarge { .. }
        )
    }
}
