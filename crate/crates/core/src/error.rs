use thiserror::Error;

/// Errors raised by distribution, mechanism, and checker operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} outside support [{lo}, {hi}]")]
    OutOfSupport { value: f64, lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid mechanism: {0}")]
    InvalidMechanism(String),

    #[error("unsupported query: {0}")]
    Unsupported(String),

    #[error("allocation not monotone in own bid: {lo_bid} -> {lo_alloc}, {hi_bid} -> {hi_alloc}")]
    IncentiveViolation {
        lo_bid: f64,
        lo_alloc: f64,
        hi_bid: f64,
        hi_alloc: f64,
    },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
