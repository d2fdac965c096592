//! Reflecting Brownian motion on W′, transition-density histograms and
//! covariance estimates.

mod covariance;
mod density;
mod holder;
mod path;
mod reflect;

pub use covariance::{estimate_covariance, CovarianceEstimate};
pub use density::{empirical_densities, empirical_density, DensityParams, EmpiricalDensity};
pub use holder::{holder_density_check, HolderRow};
pub use path::{simulate_path, PathState, CLOSURE_TOL, STEP_RULE};
pub use reflect::{reflect_step, specular, StepStats, MAX_REFLECTIONS};

use crate::geometry::GeometryError;
use crate::raster::RasterError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffusionError {
    #[error("dt = {dt} violates the step rule dt ≤ (rho_prime/6)² = {limit}")]
    InvalidTimeStep { dt: f64, limit: f64 },
    #[error("start point {0:?} is not in the closure of the cluster")]
    NotInCluster(Vec<f64>),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}
