use perclab_core::analysis::{clt_sweep, KernelParams};
use perclab_core::diffusion::{empirical_densities, estimate_covariance, EmpiricalDensity, StepStats};
use perclab_core::geometry::{closest_point, regularity_report};
use perclab_core::medium::{sample_cluster, ClusterFile, ClusterModel};
use perclab_core::point::zero;
use perclab_core::rng::{derive_seed, Purpose};
use serde::Serialize;

use crate::config::{CovarianceConfig, RunConfig};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::pde_cmd;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Generate,
    Diagnose,
    Simulate,
    CltSweep,
    PdeCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Diagnose => "diagnose",
            Command::Simulate => "simulate",
            Command::CltSweep => "clt-sweep",
            Command::PdeCheck => "pde-check",
        }
    }
}

/// Where the cluster comes from, with its dimension.
pub(crate) enum Source {
    File(ClusterFile),
    Sample(usize),
}

impl Source {
    pub(crate) fn resolve(cfg: &RunConfig) -> Result<Self, CliError> {
        if let Some(path) = &cfg.cluster_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::schema(format!("cannot read cluster file {}: {e}", path.display())))?;
            return Ok(Source::File(ClusterFile::from_json(&text)?));
        }
        match &cfg.medium {
            Some(m) => Ok(Source::Sample(m.dimension)),
            None => Err(CliError::schema("config needs `medium` or `cluster_file`")),
        }
    }

    pub(crate) fn dimension(&self) -> usize {
        match self {
            Source::File(f) => f.d,
            Source::Sample(d) => *d,
        }
    }

    /// The cluster and the number of media drawn (0 when read from a file).
    pub(crate) fn load<const D: usize>(self, cfg: &RunConfig) -> Result<(ClusterModel<D>, u32), CliError> {
        match self {
            Source::File(f) => Ok((f.into_model::<D>()?, 0)),
            Source::Sample(_) => {
                let m = cfg.medium.as_ref().expect("checked in resolve");
                let s = sample_cluster(&m.params::<D>()?, derive_seed(cfg.seed, Purpose::Medium, 0))?;
                Ok((s.cluster, s.attempts))
            }
        }
    }
}

pub fn execute(cmd: Command, cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    if cmd == Command::PdeCheck {
        return pde_cmd::run(cfg, out);
    }
    let source = Source::resolve(cfg)?;
    match source.dimension() {
        2 => dispatch::<2>(cmd, source, cfg, out),
        3 => dispatch::<3>(cmd, source, cfg, out),
        d => Err(CliError::schema(format!("dimension {d} is not supported (use 2 or 3)"))),
    }
}

fn dispatch<const D: usize>(cmd: Command, source: Source, cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let (cluster, attempts) = source.load::<D>(cfg)?;
    match cmd {
        Command::Generate => generate(&cluster, attempts, out),
        Command::Diagnose => diagnose(&cluster, cfg, out),
        Command::Simulate => simulate(&cluster, cfg, out),
        Command::CltSweep => sweep(&cluster, cfg, out),
        Command::PdeCheck => unreachable!(),
    }
}

#[derive(Serialize)]
struct MediumSummary {
    dimension: usize,
    centers: usize,
    attempts: u32,
    rho: f64,
    rho_prime: f64,
    connected: bool,
    origin_covered: bool,
}

fn generate<const D: usize>(cluster: &ClusterModel<D>, attempts: u32, out: &mut OutputDir) -> Result<(), CliError> {
    out.write("cluster.json", ClusterFile::from(cluster).to_json().as_bytes())?;
    out.write_json(
        "medium.json",
        &MediumSummary {
            dimension: D,
            centers: cluster.len(),
            attempts,
            rho: cluster.rho(),
            rho_prime: cluster.rho_prime(),
            connected: cluster.is_connected(),
            origin_covered: cluster.contains(&zero()),
        },
    )
}

fn diagnose<const D: usize>(cluster: &ClusterModel<D>, cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let rep = regularity_report(cluster, &cfg.geometry, cfg.seed)?;
    out.write_json("geometry.json", &rep)?;
    out.write("geometry.csv", rep.to_csv().as_bytes())
}

fn covariance<const D: usize>(
    cluster: &ClusterModel<D>,
    c: &CovarianceConfig,
    seed: u64,
) -> Result<(perclab_core::diffusion::CovarianceEstimate, StepStats), CliError> {
    let x0 = closest_point(cluster, &zero())?;
    Ok(estimate_covariance(cluster, &x0, c.time, c.dt, c.paths, seed)?)
}

#[derive(Serialize)]
struct TimeSummary {
    t: f64,
    total: u64,
    overflow: u64,
    empty_volume_bins: usize,
}

#[derive(Serialize)]
struct SimulateSummary {
    epsilon: f64,
    n_paths: u64,
    start: Vec<f64>,
    times: Vec<TimeSummary>,
    density_stats: StepStats,
    covariance_stats: StepStats,
}

fn simulate<const D: usize>(cluster: &ClusterModel<D>, cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let d = cfg
        .diffusion
        .as_ref()
        .ok_or_else(|| CliError::schema("`simulate` needs a `diffusion` section"))?;
    let (dens, stats) = empirical_densities(cluster, &d.density, &d.times, d.epsilon, cfg.seed)?;
    let (cov, cov_stats) = covariance(cluster, &d.covariance, cfg.seed)?;
    let mut csv = EmpiricalDensity::<D>::csv_header();
    for e in &dens {
        csv.push_str(&e.csv_rows());
    }
    out.write("density.csv", csv.as_bytes())?;
    out.write_json("covariance.json", &cov)?;
    out.write_json(
        "simulate.json",
        &SimulateSummary {
            epsilon: d.epsilon,
            n_paths: d.density.n_paths,
            start: dens.first().map(|e| e.start.clone()).unwrap_or_default(),
            times: dens
                .iter()
                .map(|e| TimeSummary {
                    t: e.t,
                    total: e.total(),
                    overflow: e.overflow,
                    empty_volume_bins: e.empty_volume_bins.len(),
                })
                .collect(),
            density_stats: stats,
            covariance_stats: cov_stats,
        },
    )
}

fn sweep<const D: usize>(cluster: &ClusterModel<D>, cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let params = cfg.analysis.sweep(D);
    if params.epsilons.is_empty() || params.epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::schema(format!(
            "analysis.epsilons must be strictly decreasing (got {:?})",
            params.epsilons
        )));
    }
    let sigma = match &cfg.analysis.sigma {
        Some(s) => s.clone(),
        None => {
            let (cov, _) = covariance(cluster, &cfg.analysis.covariance, cfg.seed)?;
            out.write_json("covariance.json", &cov)?;
            cov.sigma
        }
    };
    let kernel = KernelParams::new(sigma)?;
    let res = clt_sweep(cluster, &kernel, &params, cfg.seed)?;
    out.write("clt.csv", res.to_csv().as_bytes())?;
    let mut summary = res.summary_json();
    summary.push('\n');
    out.write("clt_summary.json", summary.as_bytes())?;
    out.write_json("clt_result.json", &res)
}
