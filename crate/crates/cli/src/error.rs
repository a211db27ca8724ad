use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Engine(#[from] mobgraph::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::Engine(mobgraph::Error::InvalidInput(_)) => ExitCode::from(2),
            CliError::Engine(mobgraph::Error::Format(_)) => ExitCode::from(2),
            CliError::Engine(mobgraph::Error::ResourceLimit { .. }) => ExitCode::from(3),
            _ => ExitCode::FAILURE,
        }
    }
}
