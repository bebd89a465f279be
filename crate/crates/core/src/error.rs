use thiserror::Error;

/// Errors raised by fitting, prediction and evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("outcome `{0}` contains a single class")]
    SingleClass(String),

    #[error("outcome combination {0} never observed")]
    EmptyCategory(String),

    #[error("separation detected: {0}")]
    Separation(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("undefined calibration slope: {0}")]
    UndefinedSlope(String),

    #[error("degenerate MCMC chain: {0}")]
    DegenerateChain(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
