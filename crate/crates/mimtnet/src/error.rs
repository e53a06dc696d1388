//! Error type shared by the whole crate.

use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
///
/// The CLI maps these onto process exit codes: parameter misuse exits 2,
/// data/format problems exit 3, training failures exit 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameter or configuration value.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A cell in a data file could not be parsed.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// Structural problem with a data file (header, column set, format version).
    #[error("schema error: {0}")]
    Schema(String),

    /// Shape mismatch between data and model dimensions.
    #[error("shape error: {0}")]
    Shape(String),

    /// Synthetic generation could not satisfy its constraints.
    #[error("generation error: {0}")]
    Generation(String),

    /// Training diverged or produced a non-finite loss.
    #[error("training error at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    /// Underlying I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Generation(_) => 2,
            Error::Parse { .. } | Error::Schema(_) | Error::Shape(_) | Error::Io { .. } => 3,
            Error::Training { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
