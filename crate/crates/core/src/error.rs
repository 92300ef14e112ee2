use thiserror::Error;

/// Errors raised by the library. The CLI maps every variant to exit status 1
/// except pipeline stage failures, which live in the report instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal check failed: {0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
