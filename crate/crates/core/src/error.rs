use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument exceeds a configured cap, or an intermediate value
    /// (integer norm, flow time) would overflow.
    #[error("range error: {0}")]
    Range(String),

    /// Malformed user input (config files, radius specs, CSV).
    #[error("input error: {0}")]
    Input(String),

    /// Internal state lost numerical integrity (non-positive determinant,
    /// reduction failed to terminate).
    #[error("numeric corruption: {0}")]
    Corruption(String),

    /// A required precomputed cache (translate set, count curve) is missing
    /// or does not cover the requested range.
    #[error("missing dependency: {0}")]
    Dependency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
