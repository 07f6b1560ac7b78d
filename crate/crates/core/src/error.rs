use thiserror::Error;

/// Errors produced by measure queries, constant evaluation and the variational search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval: lower endpoint {a} exceeds upper endpoint {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not reach relative tolerance {tol:e} (residual {residual:e})")]
    Quadrature { residual: f64, tol: f64 },

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("trial function has zero L^p norm against nu")]
    ZeroDenominator,

    #[error("trial function has infinite L^p norm against nu")]
    InfiniteDenominator,

    #[error("trace too short: need at least {need} finite points, got {got}")]
    TraceTooShort { need: usize, got: usize },

    #[error("{path}: {message}")]
    Spec { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
