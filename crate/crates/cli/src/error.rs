//! CLI errors and their exit codes.

use std::path::PathBuf;

use thiserror::Error;

use bsim_engine::EngineError;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RARE_EVENT: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema violation; `path` locates the offending field.
    #[error("{file}: at `{path}`: {message}")]
    Schema { file: PathBuf, path: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Engine(#[from] EngineError),
    /// The result was written but no replication hit Ω.
    #[error("no replication hit the constraint set: {0}")]
    ZeroHits(String),
    #[error("{0} acceptance criteria failed")]
    Validation(usize),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema { .. } | CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            // a failed proxy search or an inversion outside its domain means
            // the event was too rare for the chosen n and L
            CliError::Engine(EngineError::Proxy(_) | EngineError::Inversion(_)) => EXIT_RARE_EVENT,
            CliError::Engine(_) => EXIT_CONFIG,
            CliError::ZeroHits(_) => EXIT_RARE_EVENT,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
