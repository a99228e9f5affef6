//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value left the numerical domain of an operation (e.g. a point on or
    /// outside the Poincaré ball boundary, a vanishing Möbius denominator).
    #[error("numerical domain violation: {0}")]
    NumericalDomain(String),

    /// Midpoint weights whose conformal-weighted sum vanishes.
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("signature parse error: {0}")]
    Signature(String),

    /// Every validation failure for a run configuration, one per line.
    #[error("invalid configuration:\n{0}")]
    Config(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    /// Non-finite loss or gradient; the message names the offending parameter.
    #[error("gradient failure: {0}")]
    Gradient(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
