//! Raster checks of the Neumann heat equation on 2-D clusters: parabolic
//! Harnack ratios, oscillation decay and Neumann eigenvalues.

mod cylinders;
mod field;
mod harnack;
mod heat;
mod holder;
mod operator;
mod poincare;

pub use cylinders::{ball_cells, CylinderSet, ParabolicCylinders};
pub use field::{CoefficientField, FaceMean};
pub use harnack::{harnack_ratio, harnack_sample, harnack_study, HarnackReport, HarnackSample, HarnackSetup, RefinementPoint};
pub use heat::{heat_solve, stable_dt, HeatField, InitialDatum, Scheme, SolveOptions, MASS_TOL};
pub use holder::{holder_oscillation, holder_study, HolderReport, OscLevel};
pub use poincare::{poincare_constant, poincare_sweep, PoincareReport};

use crate::raster::RasterError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdeError {
    #[error("cell {cell}: eigenvalues [{eig_min}, {eig_max}] outside [{lambda}, {big_lambda}]")]
    EllipticityViolated {
        cell: usize,
        eig_min: f64,
        eig_max: f64,
        lambda: f64,
        big_lambda: f64,
    },
    #[error("explicit step dt = {dt} exceeds the stability limit {limit}")]
    UnstableStep { dt: f64, limit: f64 },
    #[error("empty cylinder: {0}")]
    EmptyCylinder(String),
    #[error("field is not positive on the cylinder (min {0})")]
    NonPositiveField(f64),
    #[error("only {usable} usable oscillation levels (need 3)")]
    TooFewLevels { usable: usize },
    #[error("ball is not 4-connected in the mask")]
    DisconnectedBall,
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
}
