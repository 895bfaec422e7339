use thiserror::Error;

/// Failures surfaced by the command-line front end, mapped onto exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Unreadable, unwritable or ill-formed files (exit 2).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<tvpoint_core::Error> for CliError {
    fn from(err: tvpoint_core::Error) -> Self {
        CliError::Usage(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
