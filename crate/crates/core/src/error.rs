//! Error taxonomy shared by all simulator modules.

use thiserror::Error;

/// Errors raised by configuration validation, numeric domain checks and I/O.
#[derive(Debug, Error)]
pub enum SimError {
    /// Invalid configuration (parameter outside its allowed domain).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input is outside the numeric domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Stream or grid dimensions do not match the declared framing.
    #[error("framing error: {0}")]
    Framing(String),

    /// A peak or target could not be located where expected.
    #[error("detection error: {0}")]
    Detection(String),

    /// Underlying I/O failure, with path context attached by the caller.
    #[error("io error: {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file (mask, config or trace).
    #[error("parse error: {0}")]
    Parse(String),
}

impl SimError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        SimError::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
