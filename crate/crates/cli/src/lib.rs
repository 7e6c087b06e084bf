//! Scenario runner: JSON configurations in, CSV artifacts and a run manifest out.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;
use wnt_core::WntError;

pub use config::{ConfigError, Experiment, LoadError, ScenarioConfig};
pub use manifest::{Bound, Check, Manifest, RunStatus, MANIFEST_FILE};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "WNTLAB_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "wntlab-out";

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] WntError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl LabError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

/// Output directory of a scenario under `root`.
pub fn output_dir(cfg: &ScenarioConfig, root: &Path) -> PathBuf {
    match &cfg.output {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => root.join(p),
        None => root.join(cfg.name()),
    }
}

/// Runs one scenario into `dir` and writes its manifest there, also when the
/// experiment itself fails. The returned error is the experiment's.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path, seed: u64) -> (Manifest, Option<LabError>) {
    let start = Instant::now();
    let result = std::fs::create_dir_all(dir)
        .map_err(|e| LabError::io(dir, e))
        .and_then(|_| experiments::run(cfg, dir, seed));
    let (status, outcome, err) = match result {
        Ok(o) => (RunStatus::Ok, o, None),
        Err(e) => (RunStatus::Error, experiments::Outcome::default(), Some(e)),
    };
    let manifest = Manifest {
        name: cfg.name(),
        experiment: cfg.experiment.to_string(),
        config: cfg.clone(),
        seed,
        threads: rayon::current_num_threads(),
        versions: manifest::Versions::current(),
        wall_time_s: start.elapsed().as_secs_f64(),
        status,
        error: err.as_ref().map(|e| e.to_string()),
        key_check: outcome.key,
        checks: outcome.checks,
        metrics: outcome.metrics,
        artifacts: outcome.artifacts,
    };
    let err = match (manifest.write(dir), err) {
        (_, Some(e)) => Some(e),
        (Err(e), None) => Some(LabError::io(&dir.join(MANIFEST_FILE), e)),
        (Ok(()), None) => None,
    };
    (manifest, err)
}
