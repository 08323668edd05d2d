use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or inconsistent case configuration. `field` is a JSON path.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    /// Arguments that violate an operation's preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A result depends on series coefficients beyond the tracked precision.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// An identity that must hold for every eligible case failed.
    #[error("internal contract violation: {0}")]
    ContractViolation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    pub fn contract(message: impl Into<String>) -> Self {
        Error::ContractViolation(message.into())
    }

    pub fn precision(message: impl Into<String>) -> Self {
        Error::PrecisionExhausted(message.into())
    }

    /// Process exit code for the CLI: 1 configuration, 2 precision, 3 contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Syntax { .. } | Error::InvalidInput(_) | Error::Io(_) => 1,
            Error::PrecisionExhausted(_) => 2,
            Error::ContractViolation(_) => 3,
        }
    }
}
