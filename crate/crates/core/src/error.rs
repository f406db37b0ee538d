use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A scalar parameter fell outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        /// Parameter name.
        name: &'static str,
        /// What was wrong with it.
        reason: String,
    },
    /// Two inputs disagree on the number of experts or actions.
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        /// Which dimension.
        what: &'static str,
        /// Expected size.
        expected: usize,
        /// Actual size.
        found: usize,
    },
    /// A probability vector does not sum to one or has entries outside [0, 1].
    #[error("not a probability vector: {0}")]
    NotAProbabilityVector(String),
    /// Importance weighting was requested with a zero acting probability.
    #[error("acting probability snapshot is zero")]
    ZeroActingProbability,
    /// A weight update produced a zero or non-finite weight.
    #[error("weight of expert {expert} became {value} after update")]
    NonFiniteWeight {
        /// Expert index (0-based).
        expert: usize,
        /// The offending value.
        value: f64,
    },
    /// Advice was requested while the cache still has free frames.
    #[error("cache is not full, no eviction is needed")]
    CacheNotFull,
    /// The requested victim is not resident.
    #[error("victim is not resident in the cache")]
    VictimNotResident,
    /// The cache is full and no victim was given.
    #[error("cache is full and no victim was given")]
    MissingVictim,
    /// The key being inserted is already resident.
    #[error("key is already resident")]
    AlreadyResident,
    /// A synthetic workload or environment specification is malformed.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    /// A trace contained no requests.
    #[error("empty trace")]
    EmptyTrace,
}

/// Result alias for this crate.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
