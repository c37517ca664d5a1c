use std::path::{Path, PathBuf};

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] chdef::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status. 1 is reserved for a completed run whose checks
    /// failed and 2 for usage errors.
    pub fn exit_code(&self) -> i32 {
        use chdef::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Malformed(_) => 3,
            CliError::Io { .. } => 6,
            CliError::Core(e) => match e {
                E::Parse(_)
                | E::UnknownGenerator(_)
                | E::InvalidInput(_)
                | E::Transcription(_)
                | E::DimensionMismatch { .. }
                | E::NotHermitian(_) => 3,
                E::CentralizerFailure(_) => 4,
                E::RelationFailure(_) => 5,
                _ => 7,
            },
        }
    }
}
