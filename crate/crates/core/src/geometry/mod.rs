//! Geometric functionals on the inflated cluster: closest-point projection,
//! hole size, intrinsic distance, volume regularity and isoperimetric cuts.

mod distance;
mod isoperimetric;
mod projection;
mod report;
mod volume;

pub use distance::{intrinsic_distance_upper, SourceDistances};
pub use isoperimetric::{cut_ratio, isoperimetric_probe, Cut, CutKind, CutRatio, IsoProbe};
pub use projection::{closest_point, euclidean_gap, hole_size, HoleBracket};
pub use report::{regularity_report, GeometryReport, RadiusRow, RegularityParams, UpsilonPoint};
pub use volume::{ball_volume, uniform_in_ball};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("cluster has no centers")]
    EmptyCluster,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {0:?} is not in the cluster")]
    NotInCluster(Vec<f64>),
    #[error("points are in different components")]
    Unreachable,
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}
