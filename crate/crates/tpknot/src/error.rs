//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KnotError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate pair: sample points coincide with a nonzero wedge")]
    DegeneratePair,
    #[error("antipodal pair: shortest arc is ambiguous")]
    AntipodalPair,
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("empty domain: {0}")]
    EmptyDomain(String),
    #[error("incompatible inputs: {0}")]
    IncompatibleInputs(String),
}

pub type Result<T> = std::result::Result<T, KnotError>;
