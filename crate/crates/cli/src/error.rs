use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 1;
    pub const IO: u8 = 2;
    pub const DIVERGED: u8 = 3;
    pub const NO_VIABLE_CONFIG: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad key, value or flag combination. `key` names the offender.
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file was read but its contents are not what we wrote.
    #[error("{}: {detail}", path.display())]
    Format { path: PathBuf, detail: String },

    #[error(transparent)]
    Core(#[from] fedualex::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => exit::CONFIG,
            CliError::Io { .. } | CliError::Format { .. } => exit::IO,
            CliError::Core(fedualex::Error::Diverged { .. }) => exit::DIVERGED,
            CliError::Core(fedualex::Error::NoViableConfig { .. }) => exit::NO_VIABLE_CONFIG,
            CliError::Core(_) => exit::CONFIG,
        }
    }
}
