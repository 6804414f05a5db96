use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Core(#[from] batched_nsga3::Error),
    #[error("{0} run(s) failed")]
    Failed(usize),
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 3,
            Self::Io { .. } => 4,
            Self::Parse { .. } => 5,
            Self::Core(_) => 6,
            Self::Failed(_) => 7,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
