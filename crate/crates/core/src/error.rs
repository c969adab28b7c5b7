use thiserror::Error;

use crate::mapping::IterationTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("velocity field is not curl-free: residual {residual:e} exceeds tolerance {tolerance:e}")]
    CurlTooLarge { residual: f64, tolerance: f64 },

    #[error("nonzero circulation {circulation:e} around periodic axis {axis}; the potential would be multivalued")]
    PeriodCirculationNonzero { axis: usize, circulation: f64 },

    #[error("wave function amplitude {amplitude:e} at point {index} is below the phase floor")]
    ZeroAmplitude { index: usize, amplitude: f64 },

    #[error("psi = {value:e} at point {index} is below the positivity floor")]
    NonPositivePsi { index: usize, value: f64 },

    #[error("time must be strictly positive, got {0}")]
    NonPositiveTime(f64),

    #[error("kernel time offset {dt:e} is below the floor {floor:e}")]
    TimeOffsetTooSmall { dt: f64, floor: f64 },

    #[error("fixed-point iteration did not converge after {} iterations (last difference {:e})", .0.iterations_used(), .0.last_difference().unwrap_or(f64::NAN))]
    NotConverged(IterationTrace),

    #[error("explicit step is unstable: {0}")]
    UnstableStep(String),

    #[error("{path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
