use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),

    #[error("cannot read {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },

    #[error("{scenario}: {source}")]
    Numerical { scenario: String, source: giantatom::Error },

    #[error("{scenario}: {msg}")]
    Check { scenario: String, msg: String },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } => 2,
            CliError::Numerical { .. } | CliError::Check { .. } => 3,
            CliError::Write { .. } => 1,
        }
    }
}

/// Attach a scenario label to a library error.
pub(crate) fn numerical(scenario: &str) -> impl Fn(giantatom::Error) -> CliError + '_ {
    move |source| CliError::Numerical { scenario: scenario.to_string(), source }
}
