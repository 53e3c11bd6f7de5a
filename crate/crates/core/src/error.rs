use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("current {current:e} A is at or beyond the critical-current scale {istar:e} A")]
    BeyondCriticalCurrent { current: f64, istar: f64 },

    #[error("adiabatic labeling failed at Bz = {field:e} T: {reason}")]
    LabelingFailure { field: f64, reason: String },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("degenerate circuit: {0}")]
    DegenerateCircuit(String),

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("integration step {step:e} s is too large for rates up to {max_rate:e} 1/s (need <= {limit:e} s)")]
    Stiffness { step: f64, max_rate: f64, limit: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("fit failed after {iterations} iterations (residual norm {residual_norm:e}): {reason}")]
    FitFailure {
        reason: String,
        residual_norm: f64,
        iterations: usize,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
