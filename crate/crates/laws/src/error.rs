use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("invalid law parameter: {0}")]
    Parameter(String),
    #[error("tilt {tau} outside the open MGF domain ]{lo}, {hi}[")]
    TiltDomain { tau: f64, lo: f64, hi: f64 },
    #[error("block count {0} must be an integer for this law")]
    NonIntegerCount(f64),
    #[error("no simulation law available: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Core(#[from] bsim_core::Error),
}

pub type Result<T> = std::result::Result<T, LawError>;
