use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },

    #[error(transparent)]
    Core(#[from] sdnop_core::Error),

    #[error("solver hit the outer iteration limit")]
    MaxIterations,

    #[error("inner solve failed: {0}")]
    InnerSolve(String),

    #[error("rate sweep failed: {0}")]
    Sweep(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } | CliError::Json { .. } | CliError::Core(_) => 1,
            CliError::MaxIterations => 2,
            CliError::InnerSolve(_) => 3,
            CliError::Sweep(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
