use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag, config key or value. Exit code 2.
    #[error("invalid value for --{flag}: {message}")]
    Usage { flag: String, message: String },

    /// Solver or simulator failure. Exit code 1.
    #[error(transparent)]
    Numerical(#[from] pspin::Error),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn usage(flag: &str, message: impl Into<String>) -> Self {
        CliError::Usage { flag: flag.to_string(), message: message.into() }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Numerical(_) | CliError::Io { .. } => 1,
        }
    }
}
