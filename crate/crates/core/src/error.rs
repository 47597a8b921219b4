//! Crate-wide error type.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape or value problems in configurations, parameters, or inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// API misuse, e.g. stepping a terminated environment without reset.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// A NaN or infinity surfaced where training must not hide it.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Linear-algebra breakdown that jitter escalation could not repair.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Config-file syntax or schema violation with a line-level diagnostic.
    #[error("{path}:{line}: {msg}")]
    ConfigParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }
}
