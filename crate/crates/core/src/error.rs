use num_bigint::BigInt;
use thiserror::Error;

use crate::smash::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("cannot parse group literal {literal:?}: {reason}")]
    GroupParse { literal: String, reason: String },

    #[error("element does not belong to group {group}: {reason}")]
    ForeignElement { group: String, reason: String },

    #[error("group mismatch: {left} vs {right}")]
    GroupMismatch { left: String, right: String },

    #[error("homomorphism is not well defined: {0}")]
    IllDefinedHom(String),

    #[error("{0} is not a prime")]
    NotPrime(BigInt),

    #[error("operation requires a group without free part, got {0}")]
    PositiveFreeRank(String),

    #[error("{0}")]
    Precondition(String),

    #[error("invalid pointed set: {0}")]
    InvalidPointedSet(String),

    #[error("invalid pointed map: {0}")]
    InvalidPointedMap(String),

    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),

    #[error("cannot parse smash element {text:?}: {reason}")]
    SmashParse { text: String, reason: String },

    #[error("level {level} is outside the tower's declared range (max {max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("thread incompatible at level {level}: {reason}")]
    IncompatibleThread { level: usize, reason: String },

    #[error("chain incompatible at level {level}: {reason}")]
    IncompatibleChain { level: usize, reason: String },

    #[error("Mittag-Leffler index undetermined at level {level} within window {window}")]
    Undetermined { level: usize, window: usize },

    #[error("eventual-image tower is not surjective at level {level}")]
    NotSurjective { level: usize },

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("support profile is rising at window edge (level {level})")]
    RisingProfile { level: usize },

    #[error("non-unique lift of label {label} at level {level}")]
    AmbiguousLift { level: usize, label: Label },

    #[error("invalid formal sum: {0}")]
    InvalidFormalSum(String),

    #[error("no witness within depth {depth}")]
    NoWitness { depth: usize },

    #[error("division by {divisor} fails at level {level}, label {label}")]
    DivisionFailure {
        level: usize,
        label: Label,
        divisor: BigInt,
    },

    #[error("recursion invariant ({invariant}) violated at level {level}: {detail}")]
    InvariantViolation {
        invariant: String,
        level: usize,
        detail: String,
    },

    #[error("witness pack invalid at k = {k}, level {level}: {detail}")]
    InvalidPack {
        k: usize,
        level: usize,
        detail: String,
    },

    #[error("malformed candidate at level {level}: {detail}")]
    MalformedCandidate { level: usize, detail: String },
}
