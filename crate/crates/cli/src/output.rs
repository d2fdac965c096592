use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// Output directory that writes files atomically (temp file + rename) and
/// remembers what it wrote.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.dir.join(name)).map_err(|e| CliError::from(e.error))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::numeric(e.to_string()))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    threads: usize,
    versions: Versions,
    config: &'a RunConfig,
    outputs: &'a [String],
    started_unix_s: f64,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct Versions {
    perclab: &'static str,
    perclab_core: &'static str,
}

pub struct Clock {
    started: SystemTime,
    timer: Instant,
}

impl Clock {
    pub fn start() -> Self {
        Clock {
            started: SystemTime::now(),
            timer: Instant::now(),
        }
    }
}

pub fn write_manifest(
    out: &mut OutputDir,
    command: &str,
    config: &RunConfig,
    threads: usize,
    clock: &Clock,
) -> Result<(), CliError> {
    let outputs = out.written().to_vec();
    let m = Manifest {
        command,
        seed: config.seed,
        threads,
        versions: Versions {
            perclab: env!("CARGO_PKG_VERSION"),
            perclab_core: perclab_core::VERSION,
        },
        config,
        outputs: &outputs,
        started_unix_s: clock.started.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64()),
        wall_time_s: clock.timer.elapsed().as_secs_f64(),
    };
    out.write_json("manifest.json", &m)
}
