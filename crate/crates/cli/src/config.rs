use std::path::{Path, PathBuf};

use perclab_core::analysis::SweepParams;
use perclab_core::diffusion::DensityParams;
use perclab_core::geometry::RegularityParams;
use perclab_core::medium::{MediumParams, SelectionPolicy, WindowSpec};
use perclab_core::pde::SolveOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Everything a run needs besides the command name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub medium: Option<MediumConfig>,
    /// A cluster written by `generate`; takes precedence over `medium`.
    #[serde(default)]
    pub cluster_file: Option<PathBuf>,
    #[serde(default)]
    pub geometry: RegularityParams,
    #[serde(default)]
    pub diffusion: Option<DiffusionConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub pde: Option<PdeConfig>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub dimension: usize,
    pub intensity: f64,
    pub window: WindowSpec,
    pub rho: f64,
    pub rho_prime: f64,
    #[serde(default)]
    pub policy: SelectionPolicy,
    #[serde(default = "yes")]
    pub require_origin: bool,
}

impl MediumConfig {
    pub fn params<const D: usize>(&self) -> Result<MediumParams<D>, CliError> {
        Ok(MediumParams {
            intensity: self.intensity,
            window: self.window.to_window::<D>()?,
            rho: self.rho,
            rho_prime: self.rho_prime,
            policy: self.policy,
            require_origin: self.require_origin,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceConfig {
    pub paths: u64,
    pub time: f64,
    pub dt: f64,
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        CovarianceConfig {
            paths: 20_000,
            time: 25.0,
            dt: 1.0 / 36.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionConfig {
    /// Rescaled times at which densities are recorded.
    pub times: Vec<f64>,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default)]
    pub density: DensityParams,
    #[serde(default)]
    pub covariance: CovarianceConfig,
}

fn one() -> f64 {
    1.0
}

/// Overrides on top of the dimension defaults of the sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Limit covariance; estimated from the medium when absent.
    pub sigma: Option<Vec<Vec<f64>>>,
    pub covariance: CovarianceConfig,
    pub epsilons: Option<Vec<f64>>,
    pub ts: Option<Vec<f64>>,
    pub r: Option<f64>,
    pub density: Option<DensityParams>,
    pub j_radius: Option<f64>,
    pub j_center: Option<Vec<f64>>,
    pub holder_r0s: Option<Vec<f64>>,
}

impl AnalysisConfig {
    pub fn sweep(&self, d: usize) -> SweepParams {
        let mut p = SweepParams::with_dimension(d);
        if let Some(v) = &self.epsilons {
            p.epsilons = v.clone();
        }
        if let Some(v) = &self.ts {
            p.ts = v.clone();
        }
        if let Some(v) = self.r {
            p.r = v;
        }
        if let Some(v) = &self.density {
            p.density = v.clone();
        }
        if let Some(v) = self.j_radius {
            p.j_radius = v;
        }
        if let Some(v) = &self.j_center {
            p.j_center = v.clone();
        }
        if let Some(v) = &self.holder_r0s {
            p.holder_r0s = v.clone();
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// `[−side/2, side/2]²` with `cells` cells per axis on the base grid.
    Square { side: f64, cells: usize },
    /// The 2-D cluster rasterized at `pitch` on a box of half-width
    /// `half_extent` around `g(0)`.
    Cluster { pitch: f64, half_extent: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient {
    #[default]
    Identity,
    RandomBlocks { block: f64, lambda: f64, big_lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnackConfig {
    pub r: f64,
    pub tau: f64,
    pub delta: f64,
    /// Number of random positive initial data.
    pub data: usize,
    /// Grids `h, h/2, …`, this many.
    pub levels: usize,
    pub intervals: usize,
    pub r_hat: Option<f64>,
    /// A `geometry.json` from `diagnose` supplying `r_hat`.
    pub geometry_report: Option<PathBuf>,
}

impl Default for HarnackConfig {
    fn default() -> Self {
        HarnackConfig {
            r: 0.5,
            tau: 1.0,
            delta: 0.5,
            data: 20,
            levels: 2,
            intervals: 64,
            r_hat: None,
            geometry_report: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderConfig {
    pub t0: f64,
    pub r0: f64,
    pub levels: usize,
}

impl Default for HolderConfig {
    fn default() -> Self {
        HolderConfig {
            t0: 0.5,
            r0: 0.5,
            levels: 6,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareConfig {
    /// Intrinsic ball radii around the center; empty means the whole domain.
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeConfig {
    pub domain: Domain,
    #[serde(default)]
    pub coefficient: Coefficient,
    #[serde(default)]
    pub harnack: HarnackConfig,
    #[serde(default)]
    pub holder: Option<HolderConfig>,
    #[serde(default)]
    pub poincare: Option<PoincareConfig>,
    #[serde(default)]
    pub solve: SolveOptions,
    /// Dump snapshots of the first Harnack datum as PGM.
    #[serde(default)]
    pub pgm: bool,
}

/// Parses a config, reporting the JSON path of the first offending field.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::schema(format!("config error at `{path}`: {}", e.into_inner()))
    })
}

pub fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::schema(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}
