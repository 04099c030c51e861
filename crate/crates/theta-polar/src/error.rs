//! Error type shared across the crate.

use thiserror::Error;

/// Typed, recoverable failures. Precondition violations surface as one of
/// these variants; internal arithmetic never panics on finite inputs.
#[derive(Debug, Error)]
pub enum Error {
    /// Precision request outside the supported range.
    #[error("invalid precision: {0}")]
    InvalidPrecision(String),

    /// A parameter violates a documented precondition (non-positive alpha,
    /// tail target outside (0,1), empty configuration, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numeric literal could not be parsed.
    #[error("cannot parse number {0:?}")]
    Parse(String),

    /// Configuration points are too close for the requested decomposition.
    #[error("minimum gap {min_gap} below required {required}")]
    GapTooSmall { min_gap: String, required: String },

    /// A trigonometric polynomial exceeds the degree a checker supports.
    #[error("degree {degree} exceeds maximum {max} for this check")]
    DegreeTooHigh { degree: i64, max: i64 },

    /// A lemma's hypothesis is violated by the input, so the check cannot
    /// be attempted (distinct from the check failing).
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    /// Malformed structured input (points file, JSON body).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
