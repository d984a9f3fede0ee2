use thiserror::Error;

/// Errors raised by the solver and the verification harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("iteration did not converge after {iterations} steps (last update {last_update:.3e})")]
    NonConvergence { iterations: usize, last_update: f64 },
    #[error("iteration diverged at step {step} (update grew three times in a row, last {last_update:.3e})")]
    Divergence { step: usize, last_update: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
