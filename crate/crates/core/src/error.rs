use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: wrong lengths, zero vectors, out-of-range sizes.
    #[error("usage error: {0}")]
    Usage(String),
    /// A formula evaluated outside the region where it is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A combinatorial or iteration guard was exceeded.
    #[error("resource guard exceeded: {0}")]
    Resource(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
