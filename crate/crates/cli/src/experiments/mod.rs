//! One module per experiment. Each returns its checks, metrics and artifact list.

mod dirichlet;
mod duality;
mod filament;
mod gl;
mod green;
mod thermal;
mod vortex;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::{Experiment, ScenarioConfig};
use crate::manifest::Check;
use crate::{LabError, Result};

pub use dirichlet::poisson_centre_series;

#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub artifacts: Vec<String>,
    pub key: Option<String>,
}

impl Outcome {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn metric(&mut self, name: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).unwrap_or(serde_json::Value::Null);
        self.metrics.insert(name.to_string(), v);
    }

    fn key(&mut self, name: &str) {
        self.key = Some(name.to_string());
    }

    fn artifact(&mut self, name: &str) {
        self.artifacts.push(name.to_string());
    }
}

/// Shared inputs of an experiment run.
pub(crate) struct Ctx<'a> {
    pub cfg: &'a ScenarioConfig,
    pub dir: &'a Path,
    pub seed: u64,
}

impl Ctx<'_> {
    /// Writes a CSV artifact from a header and preformatted rows.
    fn csv(&self, out: &mut Outcome, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
        let mut text = String::new();
        text.push_str(header);
        text.push('\n');
        for r in rows {
            text.push_str(&r);
            text.push('\n');
        }
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| LabError::io(&path, e))?;
        out.artifact(name);
        Ok(())
    }

    /// Records an artifact written by a core routine.
    fn written(&self, out: &mut Outcome, name: &str, res: wnt_core::Result<()>) -> Result<()> {
        res?;
        out.artifact(name);
        Ok(())
    }

    fn path(&self, name: &str) -> std::path::PathBuf {
        self.dir.join(name)
    }
}

/// Fixed-precision formatting so that artifacts compare byte for byte.
pub(crate) fn fmt_row(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v:.12e}").expect("string write");
    }
    s
}

pub(crate) fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Energy histories may rise by round-off only.
pub(crate) fn non_increasing(v: &[f64], rel: f64) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + rel * w[0].abs().max(1.0))
}

pub(crate) fn run(cfg: &ScenarioConfig, dir: &Path, seed: u64) -> Result<Outcome> {
    let ctx = Ctx { cfg, dir, seed };
    let three = cfg.domain.dim == 3;
    match cfg.experiment {
        Experiment::DualityCheck if three => duality::run::<3>(&ctx),
        Experiment::DualityCheck => duality::run::<2>(&ctx),
        Experiment::Dirichlet if three => dirichlet::run::<3>(&ctx),
        Experiment::Dirichlet => dirichlet::run::<2>(&ctx),
        Experiment::GreenAsymptotics if three => green::run_3d(&ctx),
        Experiment::GreenAsymptotics => green::run_2d(&ctx),
        Experiment::GlRelax => gl::relax(&ctx),
        Experiment::LogExpansion => gl::log_expansion(&ctx),
        Experiment::Vortex2dFlow => vortex::run(&ctx),
        Experiment::Filament3dFlow => filament::run(&ctx),
        Experiment::ThermalCoupled => thermal::run(&ctx),
    }
}
