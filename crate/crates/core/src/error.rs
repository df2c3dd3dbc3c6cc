use thiserror::Error;

/// Errors raised by state construction, operators and pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller supplied arguments outside the supported domain.
    #[error("usage: {0}")]
    Usage(String),
    /// An input violated a mathematical precondition (non-unitary, non-Hermitian, ...).
    #[error("contract: {0}")]
    Contract(String),
    /// A state failed one of its structural invariants.
    #[error("validation: {check} residual {residual:.1e} exceeds {tolerance:.0e}")]
    Validation {
        check: &'static str,
        residual: f64,
        tolerance: f64,
    },
    /// Malformed input text.
    #[error("parse: line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Short machine-readable category, used as the CLI error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Contract(_) => "contract",
            Error::Validation { .. } => "validation",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
