use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (mismatched lengths,
    /// out-of-range indices and the like).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A parameter is outside the domain the operation is defined on.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A network file or config file could not be understood.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    /// A configuration is well-formed but not usable.
    #[error("config error: {0}")]
    Config(String),

    /// The exhaustive oracle refuses networks above its size limit.
    #[error("network with {n} nodes exceeds the exhaustive enumeration limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    /// A quantity is undefined for the given data (empty bins, empty sets).
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by user input (bad config, bad files, bad
    /// parameters) as opposed to failures while running.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Config(_)
                | Error::InvalidParameter(_)
                | Error::TooLarge { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
