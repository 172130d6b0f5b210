use thiserror::Error;

/// Errors raised by the solvers, the oracle and the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("closed-form solvers require a unit flocking window, got w = {0}")]
    UnsupportedWindow(f64),

    #[error("strength must be positive, got {0}")]
    NonPositiveStrength(f64),

    #[error("leader time {t1} is later than the optimal arrival time {t_o}")]
    LeaderAfterOptimum { t1: f64, t_o: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
