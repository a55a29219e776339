use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] fsopt::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Numerical(_) => 3,
            CliError::Core(e) => match e {
                fsopt::Error::Io(_) => 1,
                fsopt::Error::NonFinite { .. } => 3,
                _ => 2,
            },
        }
    }
}

pub fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
