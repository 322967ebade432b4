//! Error type shared by every operation in the crate.

/// Failure modes of the dilation and bound pipeline.
///
/// Hypothesis violations are reported through dedicated variants so that
/// callers (and the CLI exit-code mapping) can distinguish malformed
/// input, broken mathematical hypotheses, and internal consistency
/// failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-contract input (bad sizes, bad parameters).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Dimensions of the supplied matrices are mutually inconsistent.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// A matrix required to be Hermitian positive semidefinite is not.
    #[error("not positive semidefinite: {0}")]
    NotPsd(String),
    /// A row norm exceeds the contraction bound.
    #[error("not a contraction: {0}")]
    NotContraction(String),
    /// Two matrices required to commute do not.
    #[error("not commuting: {0}")]
    NotCommuting(String),
    /// An intertwining relation required between tuples fails.
    #[error("not intertwining: {0}")]
    NotIntertwining(String),
    /// A contraction required to be completely non-unitary has a
    /// unimodular eigenvalue.
    #[error("not completely non-unitary: {0}")]
    NotCnu(String),
    /// A row contraction required to be pure is not.
    #[error("not pure: {0}")]
    NotPure(String),
    /// An eigenvalue modulus falls inside the ambiguous classification
    /// band around the unimodularity threshold.
    #[error("margin violation: {0}")]
    MarginViolation(String),
    /// The computation is too ill-conditioned to certify.
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    /// The dimension-padding policy could not equalize the two sides of
    /// the colligation.
    #[error("padding failure: {0}")]
    PadFailure(String),
    /// An internal consistency check failed; indicates a bug or a loss of
    /// precision beyond what the certificates tolerate.
    #[error("internal error: {0}")]
    Internal(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
