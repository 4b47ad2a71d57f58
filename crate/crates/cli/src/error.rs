use hybridlab_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] CoreError),

    #[error("reading {path}: {source}")]
    Read { path: String, source: std::io::Error },

    #[error("writing {path}: {source}")]
    Write { path: String, source: std::io::Error },

    #[error("scenario {path}: {message}")]
    Schema { path: String, message: String },

    #[error("bad input: {0}")]
    Input(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),

    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 input/schema, 3 resource cap, 4 internal invariant or replay mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::ResourceCap(_)) => 3,
            CliError::Core(CoreError::Invariant(_)) => 4,
            CliError::Write { .. } | CliError::ReplayMismatch(_) | CliError::Internal(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
