use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("malformed path file {file}: line {line}: {message}")]
    PathLine {
        file: String,
        line: usize,
        message: String,
    },

    #[error("malformed path file {file}: {message}")]
    PathFile { file: String, message: String },

    #[error(transparent)]
    Core(#[from] branch_bayes::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for numerical failures, 1 for everything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
