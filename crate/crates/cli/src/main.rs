use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use wnt_lab::report::Report;
use wnt_lab::{output_dir, run_scenario, LabError, ScenarioConfig, DEFAULT_OUTPUT_ROOT, OUTPUT_ROOT_ENV};

/// Finite-difference laboratory for anisotropic Ginzburg–Landau vortices.
#[derive(Parser)]
#[command(name = "wntlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario configurations and write artifacts plus a run manifest.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output root; falls back to the environment, then ./wntlab-out.
        #[arg(long, env = OUTPUT_ROOT_ENV)]
        out: Option<PathBuf>,
        /// Overrides the seed in every configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Summarize run manifests (files or scenario directories).
    Report {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// CSV destination, default <output root>/report.csv.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, env = OUTPUT_ROOT_ENV)]
        out: Option<PathBuf>,
    },
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn root(out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

fn run(configs: &[PathBuf], root: &Path, seed: Option<u64>, threads: Option<usize>) -> anyhow::Result<u8> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    // every configuration is validated before anything runs
    let mut loaded = Vec::with_capacity(configs.len());
    for p in configs {
        match ScenarioConfig::load(p) {
            Ok(c) => loaded.push(c),
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(EXIT_SCHEMA);
            }
        }
    }
    let mut code = 0;
    for cfg in &loaded {
        let dir = output_dir(cfg, root);
        let (m, err) = run_scenario(cfg, &dir, seed.unwrap_or(cfg.seed));
        match err {
            Some(LabError::Config(e)) => {
                eprintln!("error: {}: {e}", m.name);
                code = code.max(EXIT_SCHEMA);
            }
            Some(e) => {
                eprintln!("error: {}: {e}", m.name);
                code = code.max(EXIT_NUMERIC);
            }
            None => {
                let verdict = if m.passed() { "PASS" } else { "FAIL" };
                println!(
                    "{verdict} {} ({}) {} checks, {} violations, {:.2}s -> {}",
                    m.name,
                    m.experiment,
                    m.checks.len(),
                    m.violations(),
                    m.wall_time_s,
                    dir.display()
                );
                if !m.passed() {
                    for c in m.checks.iter().filter(|c| !c.passed) {
                        println!("  {} = {:e} violates {}", c.name, c.value, c.bound);
                    }
                    // a schema or numeric error elsewhere takes precedence
                    if code == 0 {
                        code = EXIT_CHECK_FAILED;
                    }
                }
            }
        }
    }
    Ok(code)
}

fn report(manifests: &[PathBuf], csv: Option<PathBuf>, root: &Path) -> anyhow::Result<u8> {
    let rep = Report::collect(manifests);
    for (p, why) in &rep.skipped {
        eprintln!("warning: skipping {}: {why}", p.display());
    }
    if rep.rows.is_empty() {
        eprintln!("error: no readable manifest");
        return Ok(EXIT_SCHEMA);
    }
    print!("{}", rep.table());
    let path = csv.unwrap_or_else(|| root.join("report.csv"));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(&path, rep.csv()).with_context(|| format!("writing {}", path.display()))?;
    Ok(if rep.passed() { 0 } else { EXIT_CHECK_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run {
            configs,
            out,
            seed,
            threads,
        } => run(&configs, &root(out), seed, threads),
        Command::Report { manifests, csv, out } => report(&manifests, csv, &root(out)),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
