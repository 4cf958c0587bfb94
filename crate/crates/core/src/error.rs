use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("range error: {0}")]
    Range(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("divergent quasi-norm: {0}")]
    Divergence(String),
    #[error("numeric error: {msg} (achieved tolerance {achieved:e})")]
    Numeric { msg: String, achieved: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    Param(String),
}

pub type Result<T> = std::result::Result<T, Error>;
