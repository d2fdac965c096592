//! Command-line plumbing for perclab: configuration schema, command
//! dispatch, atomic outputs and run manifests.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
mod pde_cmd;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{execute, Command};
pub use config::{parse_config, read_config, RunConfig};
pub use error::CliError;
use output::{write_manifest, Clock, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "perclab", version, about = "Continuum percolation laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the master seed of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides `out` in the configuration).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to the config, then PERCLAB_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Cmd {
    /// Sample a medium and write the selected cluster.
    Generate,
    /// Geometry report: volume regularity, holes, intrinsic distances.
    Diagnose,
    /// Endpoint densities and the covariance estimate.
    Simulate,
    /// Local-CLT error sweep over decreasing scaling parameters.
    CltSweep,
    /// Harnack, oscillation and Poincaré checks on rasters.
    PdeCheck,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Generate => Command::Generate,
            Cmd::Diagnose => Command::Diagnose,
            Cmd::Simulate => Command::Simulate,
            Cmd::CltSweep => Command::CltSweep,
            Cmd::PdeCheck => Command::PdeCheck,
        }
    }
}

fn thread_count(cli: &Cli, cfg: &RunConfig) -> Result<Option<usize>, CliError> {
    if let Some(n) = cli.threads.or(cfg.threads) {
        return Ok(Some(n));
    }
    match std::env::var("PERCLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::schema(format!("PERCLAB_THREADS must be a positive integer (got {v:?})"))),
        Err(_) => Ok(None),
    }
}

/// Runs one command end to end; returns the output directory.
pub fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    let clock = Clock::start();
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::schema("--config <path> is required"))?;
    let mut cfg = read_config(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    let threads = thread_count(cli, &cfg)?;
    if threads == Some(0) {
        return Err(CliError::schema("thread count must be positive"));
    }
    cfg.threads = threads;
    let dir = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::schema("no output directory: pass --out or set `out`"))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::numeric(e.to_string()))?;
    let mut out = OutputDir::create(&dir)?;
    let cmd = Command::from(cli.command);
    pool.install(|| execute(cmd, &cfg, &mut out))?;
    write_manifest(&mut out, cmd.name(), &cfg, pool.current_num_threads(), &clock)?;
    Ok(dir)
}
