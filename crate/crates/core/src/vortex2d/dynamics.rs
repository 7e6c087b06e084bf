use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Result, WntError};
use crate::linalg::{self, Vector};

use super::config::VortexConfig;
use super::green::GreenTable;

/// Minimum separation and boundary clearance, in grid spacings.
pub const CLEARANCE_SPACINGS: f64 = 4.0;

/// `𝒲 = 2π² Σ_{i≠j} d_i d_j G(a_i, a_j) + γ Σ d_i²`, with the constant core
/// energy `γ`.
pub fn renormalized_energy(table: &GreenTable, cfg: &VortexConfig, gamma: f64) -> Result<f64> {
    cfg.validate()?;
    check_clearance(table, cfg)?;
    energy_unchecked(table, cfg, gamma)
}

fn energy_unchecked(table: &GreenTable, cfg: &VortexConfig, gamma: f64) -> Result<f64> {
    let n = cfg.len();
    let mut pair = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let g = table.eval(&cfg.centers[i], &cfg.centers[j])?;
            pair += 2.0 * (cfg.degrees[i] * cfg.degrees[j]) as f64 * g;
        }
    }
    let self_part: f64 = cfg.degrees.iter().map(|&d| (d * d) as f64).sum::<f64>() * gamma;
    Ok(2.0 * PI * PI * pair + self_part)
}

fn check_clearance(table: &GreenTable, cfg: &VortexConfig) -> Result<()> {
    let min = CLEARANCE_SPACINGS * table.domain().h_min();
    let sep = cfg.min_separation();
    if sep < min {
        return Err(WntError::ConfigurationTooTight(format!(
            "vortex separation {sep:.4e} below {min:.4e}"
        )));
    }
    for (i, c) in cfg.centers.iter().enumerate() {
        let d = table.domain().distance_to_boundary(c);
        if d < min {
            return Err(WntError::ConfigurationTooTight(format!(
                "vortex {i} lies {d:.4e} from the boundary (minimum {min:.4e})"
            )));
        }
    }
    Ok(())
}

/// `−∇_{a_i}𝒲` by central differences with step two grid spacings.
pub fn force(table: &GreenTable, cfg: &VortexConfig, i: usize) -> Result<Vector<2>> {
    cfg.validate()?;
    if i >= cfg.len() {
        return Err(WntError::InvalidInput(format!("vortex index {i} out of range")));
    }
    check_clearance(table, cfg)?;
    force_unchecked(table, cfg, i)
}

fn force_unchecked(table: &GreenTable, cfg: &VortexConfig, i: usize) -> Result<Vector<2>> {
    let h = 2.0 * table.domain().h_min();
    let mut f = [0.0; 2];
    for k in 0..2 {
        let mut plus = cfg.clone();
        let mut minus = cfg.clone();
        plus.centers[i][k] += h;
        minus.centers[i][k] -= h;
        for p in [&plus.centers[i], &minus.centers[i]] {
            if table.domain().distance_to_boundary(p) <= 0.0 {
                return Err(WntError::InvalidInput(format!("force stencil of vortex {i} leaves the domain")));
            }
        }
        // γ is position independent and drops out
        f[k] = -(energy_unchecked(table, &plus, 0.0)? - energy_unchecked(table, &minus, 0.0)?) / (2.0 * h);
    }
    Ok(f)
}

fn velocities(table: &GreenTable, cfg: &VortexConfig) -> Result<Vec<Vector<2>>> {
    (0..cfg.len())
        .map(|i| Ok(linalg::scale(&force_unchecked(table, cfg, i)?, cfg.mobility[i])))
        .collect()
}

fn shifted(cfg: &VortexConfig, vel: &[Vector<2>], dt: f64) -> VortexConfig {
    let mut out = cfg.clone();
    for (c, v) in out.centers.iter_mut().zip(vel) {
        linalg::axpy(c, dt, v);
    }
    out
}

/// One RK4 step of `ȧ_i = μ_i·(−∇_{a_i}𝒲)`. A step that ends with two vortices
/// closer than four spacings, or a vortex that close to the boundary, is
/// reported as [`WntError::Collision`] / [`WntError::ConfigurationTooTight`].
pub fn step_vortices(table: &GreenTable, cfg: &VortexConfig, dt: f64) -> Result<VortexConfig> {
    if !(dt > 0.0) {
        return Err(WntError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    cfg.validate()?;
    check_clearance(table, cfg)?;
    let k1 = velocities(table, cfg)?;
    let k2 = velocities(table, &shifted(cfg, &k1, 0.5 * dt))?;
    let k3 = velocities(table, &shifted(cfg, &k2, 0.5 * dt))?;
    let k4 = velocities(table, &shifted(cfg, &k3, dt))?;
    let mut out = cfg.clone();
    for i in 0..cfg.len() {
        for k in 0..2 {
            out.centers[i][k] += dt / 6.0 * (k1[i][k] + 2.0 * k2[i][k] + 2.0 * k3[i][k] + k4[i][k]);
        }
    }
    let min = CLEARANCE_SPACINGS * table.domain().h_min();
    let sep = out.min_separation();
    if sep < min {
        return Err(WntError::Collision { separation: sep, min });
    }
    check_clearance(table, &out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VortexRecord {
    pub time: f64,
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub degree: i32,
    pub energy: f64,
    pub force_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaltEvent {
    pub time: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub records: Vec<VortexRecord>,
    /// `(time, configuration)` after every accepted step, starting at t = 0.
    pub path: Vec<(f64, VortexConfig)>,
    pub energies: Vec<f64>,
    pub halt: Option<HaltEvent>,
}

impl Trajectory {
    pub fn separations(&self) -> Vec<f64> {
        self.path.iter().map(|(_, c)| c.min_separation()).collect()
    }

    /// Largest one-step increase of `𝒲` (≤ 0 for a dissipative run).
    pub fn max_energy_increase(&self) -> f64 {
        self.energies.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Columns: time, i, x_i, y_i, d_i, W, |force_i|.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("time,i,x_i,y_i,d_i,W,force_norm\n");
        for r in &self.records {
            writeln!(
                out,
                "{:.12e},{},{:.12e},{:.12e},{},{:.12e},{:.12e}",
                r.time, r.index, r.x, r.y, r.degree, r.energy, r.force_norm
            )
            .expect("string write");
        }
        fs::write(path, out)?;
        Ok(())
    }
}

fn record(table: &GreenTable, cfg: &VortexConfig, t: f64, gamma: f64, out: &mut Trajectory) -> Result<()> {
    let w = energy_unchecked(table, cfg, gamma)?;
    out.energies.push(w);
    for i in 0..cfg.len() {
        let f = force_unchecked(table, cfg, i)?;
        out.records.push(VortexRecord {
            time: t,
            index: i,
            x: cfg.centers[i][0],
            y: cfg.centers[i][1],
            degree: cfg.degrees[i],
            energy: w,
            force_norm: linalg::norm(&f),
        });
    }
    out.path.push((t, cfg.clone()));
    Ok(())
}

/// Integrates up to `steps` RK4 steps, stopping at the first collision or
/// boundary approach.
pub fn run_trajectory(table: &GreenTable, cfg: &VortexConfig, dt: f64, steps: usize, gamma: f64) -> Result<Trajectory> {
    renormalized_energy(table, cfg, gamma)?;
    let mut traj = Trajectory {
        records: Vec::new(),
        path: Vec::new(),
        energies: Vec::new(),
        halt: None,
    };
    let mut cur = cfg.clone();
    let mut t = 0.0;
    record(table, &cur, t, gamma, &mut traj)?;
    for _ in 0..steps {
        match step_vortices(table, &cur, dt) {
            Ok(next) => {
                cur = next;
                t += dt;
                record(table, &cur, t, gamma, &mut traj)?;
            }
            Err(e @ (WntError::Collision { .. } | WntError::ConfigurationTooTight(_))) => {
                traj.halt = Some(HaltEvent {
                    time: t + dt,
                    reason: e.to_string(),
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}
