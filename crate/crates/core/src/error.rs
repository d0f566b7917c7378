//! Error type shared by the whole crate.

use thiserror::Error;

/// Errors produced by targets, dynamics, samplers, diagnostics and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input object failed a structural validation check.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A numeric procedure broke down (Cholesky failure, NaN divergence, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A chain could not be started.
    #[error("initialization failed: {0}")]
    Init(String),

    /// A diagnostic could not be computed from the given data.
    #[error("diagnostics error: {0}")]
    Diagnostics(String),

    /// Bad experiment configuration (unknown sampler, missing preset, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
