use costforest_core::Error as CoreError;

/// Errors surfaced by the tool, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or configuration. Exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Input data that cannot be used. Exit code 2.
    #[error("{0}")]
    Data(String),
    /// Anything else, including failures writing output. Exit code 3.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Internal(_) => 3,
        }
    }

    /// Prefixes the message with where it happened.
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            Self::Usage(m) => Self::Usage(format!("{what}: {m}")),
            Self::Data(m) => Self::Data(format!("{what}: {m}")),
            Self::Internal(m) => Self::Internal(format!("{what}: {m}")),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) => Self::Usage(e.to_string()),
            _ => Self::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
