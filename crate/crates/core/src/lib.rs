//! Continuum percolation laboratory: Boolean-model media, reflecting
//! Brownian motion on the selected cluster, transition-density estimates
//! compared against the Gaussian limit, and raster PDE checks of the
//! parabolic Harnack, Hölder and Poincaré inequalities.

pub mod analysis;
pub mod diffusion;
pub mod geometry;
pub mod medium;
pub mod pde;
pub mod point;
pub mod raster;
pub mod rng;
pub mod stats;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
