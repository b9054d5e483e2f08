use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested size exceeds a configured cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// The answer cannot be certified at the available precision.
    #[error("precision error: {0}")]
    Precision(String),

    /// A base enclosure meets more than one regime boundary.
    #[error("ambiguous classification: {0}")]
    Ambiguous(String),

    /// A bounded search found nothing.
    #[error("capability error: {0}")]
    Capability(String),

    /// Malformed textual input (sequence literals, decimals, config files).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A constructed object violated an invariant that should hold by construction.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parse(_) => 2,
            Error::Precision(_) | Error::Ambiguous(_) => 3,
            _ => 1,
        }
    }
}
