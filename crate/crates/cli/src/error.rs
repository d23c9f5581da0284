use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ehpseq::ext_ehp::EhpError;
use ehpseq::resolution::ResolutionError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("stale cache file {path}: {reason}; delete it (or the whole cache directory) and rerun")]
    StaleCache { path: PathBuf, reason: String },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Verification(_) | CliError::Io { .. } => ExitCode::from(1),
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Internal(_) | CliError::StaleCache { .. } => ExitCode::from(3),
        }
    }
}

impl From<ResolutionError> for CliError {
    fn from(e: ResolutionError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<EhpError> for CliError {
    fn from(e: EhpError) -> Self {
        CliError::Internal(e.to_string())
    }
}
