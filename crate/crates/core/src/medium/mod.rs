//! Poisson Boolean media: point sampling, overlap components and the
//! selected (inflated) percolation cluster.

mod cluster;
mod grid;
mod poisson;
mod serial;
mod spanning;
mod window;

pub use cluster::{
    build_clusters, sample_cluster, select_cluster, ClusterDecomposition, ClusterModel,
    MediumParams, SampledCluster, SelectionPolicy, MAX_RESAMPLE_ATTEMPTS, TIE_TOL,
};
pub use grid::SpatialGrid;
pub use poisson::{sample_poisson, PointConfiguration, DISTINCT_TOL};
pub use serial::ClusterFile;
pub use spanning::{spanning_crossing, spanning_probability, SpanningEstimate};
pub use window::{Window, WindowSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MediumError {
    #[error("window is degenerate (requires finite hi > lo on every axis)")]
    DegenerateWindow,
    #[error("dimension {0} is not supported (use 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("intensity must be finite and positive, got {0}")]
    InvalidIntensity(f64),
    #[error("radius must be finite and positive, got {0}")]
    InvalidRadius(f64),
    #[error("rho_prime ({rho_prime}) must be finite and at least rho ({rho})")]
    InvalidInflatedRadius { rho: f64, rho_prime: f64 },
    #[error("point {0:?} lies outside the window")]
    PointOutsideWindow(Vec<f64>),
    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("configuration has no points")]
    NoComponents,
    #[error("no component spans the window")]
    NoSpanningCluster,
    #[error("origin not covered by the selected cluster after {attempts} attempt(s)")]
    OriginNotCovered { attempts: u32 },
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("invalid cluster JSON: {0}")]
    Json(String),
}
