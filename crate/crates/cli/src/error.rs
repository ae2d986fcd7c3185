use std::path::PathBuf;

use greycast_core::Error as CoreError;
use thiserror::Error;

/// Failures surfaced to the command line, one exit code per class.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data incompatible with model: {0}")]
    Incompatible(CoreError),
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 is left to argument parsing errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Parse(_) => 4,
            CliError::Config(_) => 5,
            CliError::Incompatible(_) => 6,
            CliError::Numerical(_) => 7,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(msg) => CliError::Config(msg),
            CoreError::InvalidHorizon => CliError::Config(e.to_string()),
            CoreError::Singular(_)
            | CoreError::Overflow { .. }
            | CoreError::Degenerate(_)
            | CoreError::Divergence { .. } => CliError::Numerical(e),
            _ => CliError::Incompatible(e),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
