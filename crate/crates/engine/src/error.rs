use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sample size too small: {0}")]
    SampleSize(String),
    #[error("constraint set: {0}")]
    Constraint(String),
    #[error("proxy search failed: {0}")]
    Proxy(String),
    #[error("inversion failed: {0}")]
    Inversion(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("problem reduction: {0}")]
    Reduction(String),
    #[error(transparent)]
    Core(#[from] bsim_core::Error),
    #[error(transparent)]
    Law(#[from] bsim_laws::LawError),
}

pub type Result<T> = std::result::Result<T, EngineError>;
