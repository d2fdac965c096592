use std::fmt;

use perclab_core::analysis::AnalysisError;
use perclab_core::diffusion::DiffusionError;
use perclab_core::geometry::GeometryError;
use perclab_core::medium::MediumError;
use perclab_core::pde::PdeError;
use perclab_core::raster::RasterError;

/// Schema or validation error in the configuration.
pub const EXIT_SCHEMA: i32 = 1;
/// The sampled or loaded medium cannot serve the request.
pub const EXIT_MODEL: i32 = 2;
/// A numerical procedure failed.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn schema(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_SCHEMA,
            message: message.into(),
        }
    }

    pub fn model(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_MODEL,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::numeric(format!("i/o error: {e}"))
    }
}

impl From<MediumError> for CliError {
    fn from(e: MediumError) -> Self {
        use MediumError::*;
        let msg = e.to_string();
        match e {
            DegenerateWindow
            | UnsupportedDimension(_)
            | InvalidIntensity(_)
            | InvalidRadius(_)
            | InvalidInflatedRadius { .. }
            | DimensionMismatch { .. }
            | Json(_) => CliError::schema(msg),
            _ => CliError::model(msg),
        }
    }
}

impl From<RasterError> for CliError {
    fn from(e: RasterError) -> Self {
        let msg = e.to_string();
        match e {
            RasterError::SourceOutside(..) => CliError::model(msg),
            _ => CliError::schema(msg),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        let msg = e.to_string();
        match e {
            GeometryError::InvalidParameter(_) => CliError::schema(msg),
            GeometryError::InsufficientSamples(_) => CliError::numeric(msg),
            _ => CliError::model(msg),
        }
    }
}

impl From<DiffusionError> for CliError {
    fn from(e: DiffusionError) -> Self {
        match e {
            DiffusionError::Geometry(g) => g.into(),
            DiffusionError::Raster(r) => r.into(),
            DiffusionError::NotInCluster(_) => CliError::model(e.to_string()),
            _ => CliError::schema(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Diffusion(d) => d.into(),
            AnalysisError::NotPositiveDefinite => CliError::numeric(e.to_string()),
            AnalysisError::MissingGridPoint { .. } => CliError::model(e.to_string()),
            _ => CliError::schema(e.to_string()),
        }
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        let msg = e.to_string();
        match e {
            PdeError::Raster(r) => r.into(),
            PdeError::EmptyCylinder(_) | PdeError::DisconnectedBall => CliError::model(msg),
            PdeError::UnstableStep { .. } | PdeError::NonPositiveField(_) | PdeError::TooFewLevels { .. } => {
                CliError::numeric(msg)
            }
            _ => CliError::schema(msg),
        }
    }
}
