use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{location}: {key}: {message}")]
    Config {
        location: String,
        key: String,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] purcell_core::Error),
}

impl CliError {
    /// 1 for invalid input or configuration, 2 for solver and analysis
    /// failures (I/O included).
    pub fn exit_code(&self) -> i32 {
        use purcell_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 1,
            CliError::Core(E::Configuration(_) | E::InvalidInput(_) | E::DimensionMismatch { .. }) => 1,
            _ => 2,
        }
    }
}
