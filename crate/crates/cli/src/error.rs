use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] landtopo::Error),

    /// The command ran but produced nothing usable.
    #[error("{0}")]
    Empty(String),

    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 ok, 1 empty result, 2 I/O, 3 validation, 4 model mismatch.
    pub fn exit_code(&self) -> u8 {
        use landtopo::Error as E;
        match self {
            CliError::Empty(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Invalid(_) => 3,
            CliError::Core(e) => match e {
                E::Io(_) => 2,
                E::Csv(c) if c.is_io_error() => 2,
                E::Json(j) if j.is_io() => 2,
                E::ModelMismatch(_) | E::ModelVersion(_) => 4,
                _ => 3,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
