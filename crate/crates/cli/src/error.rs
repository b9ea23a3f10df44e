use std::path::PathBuf;

use thiserror::Error;

use crate::ingest::IngestError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),

    #[error("{0}")]
    Core(#[from] pvaudit_core::Error),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 for anything the caller can fix in their input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Ingest(_) | CliError::Core(_) | CliError::Input(_) | CliError::Read { .. } => 2,
            CliError::Write { .. } | CliError::Internal(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
