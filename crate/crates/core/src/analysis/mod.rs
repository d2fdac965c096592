//! Gaussian limit kernel, local-CLT error statistics and ε-sweeps.

mod clt;
mod kernel;
mod sweep;

pub use clt::{clt_error, CltEntry, CltRow};
pub use kernel::{gaussian_kernel, KernelParams};
pub use sweep::{clt_sweep, CltSweepResult, IntegratedError, SweepParams};

use crate::diffusion::DiffusionError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("covariance matrix is not symmetric")]
    NotSymmetric,
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no density value for grid point {x:?} at t = {t}")]
    MissingGridPoint { t: f64, x: Vec<f64> },
    #[error("window buffer {available} is below the required {needed}")]
    WindowTooSmall { needed: f64, available: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
}
