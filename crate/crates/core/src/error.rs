use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid interval: lower bound {low} must be positive and below upper bound {high}")]
    InvalidInterval { low: f64, high: f64 },

    #[error("degenerate interval: standard error is zero")]
    DegenerateInterval,

    #[error("cannot recover standard error: {0}")]
    CannotRecoverSe(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("covariate count {covariates} exceeds the supported maximum of {max}")]
    OverflowGuard { covariates: u32, max: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
