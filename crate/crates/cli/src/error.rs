use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Core {
        path: PathBuf,
        #[source]
        source: radio_ae::Error,
    },
    #[error(transparent)]
    Run(#[from] radio_ae::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            CliError::Usage(_) => return EXIT_USAGE,
            CliError::Config { .. } | CliError::Invalid(_) | CliError::Io { .. } => return EXIT_FORMAT,
            CliError::Core { source, .. } | CliError::Run(source) => source,
        };
        match core {
            radio_ae::Error::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_FORMAT,
        }
    }
}

pub(crate) fn at_path(path: impl Into<PathBuf>) -> impl FnOnce(radio_ae::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Core { path, source }
}

pub(crate) fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
