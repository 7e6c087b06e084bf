use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WntError};
use crate::linalg::{self, Vector};

use super::geometry::{vertex_frame, Filament, FilamentSystem};
use super::interaction::{field_from_nodes, renormalized_g0, segment_nodes};

/// Fewest resolved vertices a filament may keep before it counts as collapsed.
pub const MIN_EFFECTIVE_VERTICES: usize = 8;

/// Largest step accepted by [`motion_step`]: `0.2·ℓ_min²/π`, divided by the
/// strongest curvature coefficient `|d| μ α_max (λ_max(g)/λ_min(g))` when it
/// exceeds one.
pub fn motion_cfl_bound(sys: &FilamentSystem) -> f64 {
    let an = sys.anisotropy();
    let (_, a_max) = an.a_bounds();
    let h_ev = linalg::sym_eigenvalues(an.h());
    let g_ev = linalg::sym_eigenvalues(an.g());
    let alpha_max = 1.0 + 0.5 * an.eta() * a_max * h_ev[2].powf(0.5 * an.eta());
    let d_max = sys.filaments().iter().map(|f| f.degree().unsigned_abs()).max().unwrap_or(1) as f64;
    let coef = (d_max * sys.mobility() * alpha_max * g_ev[2] / g_ev[0]).max(1.0);
    let l = sys.min_segment_length();
    0.2 * l * l / (PI * coef)
}

/// Amplification `α(x) = 1 + (η/2) a(x) ⟨h t, t⟩^{η/2}` for a unit tangent.
pub fn amplification(sys: &FilamentSystem, x: &Vector<3>, t: &Vector<3>) -> Result<f64> {
    let an = sys.anisotropy();
    let a = an.a_at(x)?;
    if a == 0.0 {
        return Ok(1.0);
    }
    let ht = linalg::quad(an.h(), t).max(0.0);
    Ok(1.0 + 0.5 * an.eta() * a * ht.powf(0.5 * an.eta()))
}

/// Vertex velocities and the dual-arclength weights used for dissipation.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub velocities: Vec<Vec<Vector<3>>>,
    pub weights: Vec<Vec<f64>>,
}

impl VelocityField {
    /// `Σ_vertices |V|² ds / μ`.
    pub fn dissipation(&self, mobility: f64) -> f64 {
        let mut total = 0.0;
        for (v, w) in self.velocities.iter().zip(&self.weights) {
            for (vk, wk) in v.iter().zip(w) {
                total += linalg::dot(vk, vk) * wk;
            }
        }
        total / mobility
    }
}

/// Normal velocities of the effective law
/// `V = μ[π|d| α κ₀ N − (σ²/κ_th) P_⊥ℋ]`, where `κ₀` is the curvature of the
/// quadratic part `g`, `N` the discrete principal normal and `P_⊥` the
/// projection onto the normal plane. Endpoints of open filaments are pinned.
pub fn normal_velocities(sys: &FilamentSystem) -> Result<VelocityField> {
    let thermal = sys.sigma() * sys.sigma() / sys.kappa_th();
    let nodes = if thermal > 0.0 { segment_nodes(sys)? } else { Vec::new() };
    let g = *sys.anisotropy().g();
    let mu = sys.mobility();
    let mut velocities = Vec::with_capacity(sys.filaments().len());
    let mut weights = Vec::with_capacity(sys.filaments().len());
    for (i, f) in sys.filaments().iter().enumerate() {
        let per_vertex: Vec<(Vector<3>, f64)> = (0..f.len())
            .into_par_iter()
            .map(|k| -> Result<(Vector<3>, f64)> {
                if !f.is_interior(k) {
                    let w = end_weight(f, k);
                    return Ok(([0.0; 3], w));
                }
                let x = f.vertices()[k];
                let frame = vertex_frame(f, k)?;
                let mut v = [0.0; 3];
                if let Some(n) = frame.normal {
                    let kappa0 =
                        linalg::dot(&linalg::matvec(&g, &frame.turn), &n) / (frame.ds * linalg::quad(&g, &frame.tangent));
                    let alpha = amplification(sys, &x, &frame.tangent)?;
                    linalg::axpy(&mut v, mu * PI * f.degree().unsigned_abs() as f64 * alpha * kappa0, &n);
                }
                if thermal > 0.0 {
                    let b = field_from_nodes(sys, &nodes, &x, Some((i, k)))?;
                    let mut perp = b;
                    linalg::axpy(&mut perp, -linalg::dot(&b, &frame.tangent), &frame.tangent);
                    linalg::axpy(&mut v, -mu * thermal, &perp);
                }
                Ok((v, frame.ds))
            })
            .collect::<Result<_>>()?;
        let (v, w): (Vec<_>, Vec<_>) = per_vertex.into_iter().unzip();
        velocities.push(v);
        weights.push(w);
    }
    Ok(VelocityField { velocities, weights })
}

fn end_weight(f: &Filament, k: usize) -> f64 {
    let v = f.vertices();
    let other = if k == 0 { 1 } else { k - 1 };
    0.5 * linalg::norm(&linalg::sub(&v[k], &v[other]))
}

/// Resolved vertex count: `min(n, ⌊length / ε_reg⌋)`.
pub fn effective_vertices(f: &Filament, eps_reg: f64) -> usize {
    let resolved = (f.euclidean_length() / eps_reg).floor();
    if resolved >= f.len() as f64 {
        f.len()
    } else {
        resolved as usize
    }
}

fn apply_velocities(sys: &FilamentSystem, vel: &VelocityField, dt: f64) -> Result<FilamentSystem> {
    let mut out = sys.clone();
    for (f, v) in out.filaments_mut().iter_mut().zip(&vel.velocities) {
        for (x, vk) in f.vertices_mut().iter_mut().zip(v) {
            linalg::axpy(x, dt, vk);
        }
    }
    for (i, f) in out.filaments().iter().enumerate() {
        if f.vertices().iter().any(|x| !linalg::is_finite(x)) {
            return Err(WntError::InvalidInput(format!("filament {i} left the finite range")));
        }
        if f.min_segment_length() == 0.0 {
            return Err(WntError::Collapse(format!("filament {i} has a degenerate segment")));
        }
        let eff = effective_vertices(f, sys.eps_reg());
        if eff < MIN_EFFECTIVE_VERTICES {
            return Err(WntError::Collapse(format!(
                "filament {i} resolved by {eff} vertices (length {:.4e})",
                f.euclidean_length()
            )));
        }
    }
    Ok(out)
}

fn check_dt(sys: &FilamentSystem, dt: f64) -> Result<()> {
    let bound = motion_cfl_bound(sys);
    if !(dt > 0.0) {
        return Err(WntError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if dt > bound * (1.0 + 1e-12) {
        return Err(WntError::StepRejected { dt, bound });
    }
    Ok(())
}

/// One explicit Euler step with Jacobi update of all vertices.
pub fn motion_step(sys: &FilamentSystem, dt: f64) -> Result<FilamentSystem> {
    check_dt(sys, dt)?;
    let vel = normal_velocities(sys)?;
    apply_velocities(sys, &vel, dt)
}

/// State of one dissipation sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipationRecord {
    pub time: f64,
    pub g0: f64,
    /// `Σ|V_n|² ds / μ` at this state.
    pub dissipation: f64,
    /// The mesh was redistributed between this record and the next.
    pub remeshed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipationReport {
    pub intervals: usize,
    /// Intervals skipped because of redistribution.
    pub skipped: usize,
    /// `Σ ΔG₀` over the used intervals.
    pub energy_change: f64,
    /// `−Σ D Δt` over the used intervals.
    pub predicted_change: f64,
    /// `|ΔG₀ + Σ D Δt| / Σ D Δt`, zero when both sides vanish.
    pub mismatch: f64,
    /// Largest single-interval mismatch.
    pub max_interval_mismatch: f64,
}

/// Compares `Δ𝒢₀` with `−∫Σ|V_n|² dt` over consecutive records, the integral
/// taken by the trapezoid rule on the recorded rates.
pub fn dissipation_check(history: &[DissipationRecord]) -> Result<DissipationReport> {
    if history.len() < 2 {
        return Err(WntError::InvalidInput("dissipation check needs at least two records".into()));
    }
    let mut used = 0;
    let mut skipped = 0;
    let mut de = 0.0;
    let mut pred = 0.0;
    let mut worst: f64 = 0.0;
    for w in history.windows(2) {
        if w[0].remeshed {
            skipped += 1;
            continue;
        }
        let dt = w[1].time - w[0].time;
        let d_g = w[1].g0 - w[0].g0;
        let p = 0.5 * (w[0].dissipation + w[1].dissipation) * dt;
        used += 1;
        de += d_g;
        pred += p;
        worst = worst.max(ratio((d_g + p).abs(), p));
    }
    Ok(DissipationReport {
        intervals: used,
        skipped,
        energy_change: de,
        predicted_change: -pred,
        mismatch: ratio((de + pred).abs(), pred),
        max_interval_mismatch: worst,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilamentRunOptions {
    pub dt: f64,
    /// Shrink each step to the stability bound instead of rejecting it.
    pub adaptive: bool,
    pub redistribute_every: usize,
    /// Redistribute only when `max/min` segment length exceeds this.
    pub redistribute_ratio: f64,
    /// Vertex snapshots every this many steps (0 disables).
    pub snapshot_stride: usize,
}

impl FilamentRunOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            adaptive: false,
            redistribute_every: 50,
            redistribute_ratio: 1.05,
            snapshot_stride: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryRecord {
    pub time: f64,
    pub g0: f64,
    pub total_length: f64,
    pub min_separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseEvent {
    pub time: f64,
    pub reason: String,
}

/// Time-stepping driver collecting dissipation and summary histories.
#[derive(Debug, Clone)]
pub struct FilamentFlow {
    pub system: FilamentSystem,
    pub time: f64,
    pub steps: usize,
    pub options: FilamentRunOptions,
    pub history: Vec<DissipationRecord>,
    pub summary: Vec<SummaryRecord>,
    pub snapshots: Vec<(f64, Vec<Filament>)>,
    pub collapse: Option<CollapseEvent>,
    /// Velocities at the current state.
    velocity: VelocityField,
}

impl FilamentFlow {
    pub fn new(system: FilamentSystem, options: FilamentRunOptions) -> Result<Self> {
        if !(options.dt > 0.0) {
            return Err(WntError::InvalidInput(format!("dt must be positive, got {}", options.dt)));
        }
        let velocity = normal_velocities(&system)?;
        let mut flow = Self {
            system,
            time: 0.0,
            steps: 0,
            options,
            history: Vec::new(),
            summary: Vec::new(),
            snapshots: Vec::new(),
            collapse: None,
            velocity,
        };
        flow.record()?;
        if options.snapshot_stride > 0 {
            flow.snapshots.push((0.0, flow.system.filaments().to_vec()));
        }
        Ok(flow)
    }

    fn record(&mut self) -> Result<()> {
        let g0 = renormalized_g0(&self.system)?;
        let mut length = 0.0;
        for i in 0..self.system.filaments().len() {
            length += super::geometry::f_length(&self.system, i)?;
        }
        self.history.push(DissipationRecord {
            time: self.time,
            g0,
            dissipation: self.velocity.dissipation(self.system.mobility()),
            remeshed: false,
        });
        self.summary.push(SummaryRecord {
            time: self.time,
            g0,
            total_length: length,
            min_separation: self.system.min_separation(),
        });
        Ok(())
    }

    pub fn velocities(&self) -> &VelocityField {
        &self.velocity
    }

    /// Step size the next [`advance`](Self::advance) will use.
    pub fn next_dt(&self) -> f64 {
        if self.options.adaptive {
            self.options.dt.min(motion_cfl_bound(&self.system))
        } else {
            self.options.dt
        }
    }

    /// One step. Returns `false` once the run has stopped on a collapse.
    pub fn advance(&mut self) -> Result<bool> {
        if self.collapse.is_some() {
            return Ok(false);
        }
        let dt = self.next_dt();
        check_dt(&self.system, dt)?;
        let next = match apply_velocities(&self.system, &self.velocity, dt) {
            Ok(s) => s,
            Err(WntError::Collapse(reason)) => {
                self.collapse = Some(CollapseEvent {
                    time: self.time + dt,
                    reason,
                });
                return Ok(false);
            }
            Err(e) => return Err(e),
        };
        self.system = next;
        self.time += dt;
        self.steps += 1;
        let every = self.options.redistribute_every;
        if every > 0 && self.steps.is_multiple_of(every) {
            let mut changed = false;
            for f in self.system.filaments_mut() {
                if f.max_segment_length() > self.options.redistribute_ratio * f.min_segment_length() {
                    f.redistribute();
                    changed = true;
                }
            }
            if changed {
                if let Some(last) = self.history.last_mut() {
                    last.remeshed = true;
                }
            }
        }
        self.velocity = normal_velocities(&self.system)?;
        self.record()?;
        let stride = self.options.snapshot_stride;
        if stride > 0 && self.steps.is_multiple_of(stride) {
            self.snapshots.push((self.time, self.system.filaments().to_vec()));
        }
        Ok(true)
    }

    /// Advances up to `steps` times, stopping early on collapse.
    pub fn run(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            if !self.advance()? {
                break;
            }
        }
        Ok(())
    }

    pub fn dissipation_report(&self) -> Result<DissipationReport> {
        dissipation_check(&self.history)
    }

    /// Columns: time, filament_id, vertex_id, x, y, z.
    pub fn write_trajectory_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("time,filament_id,vertex_id,x,y,z\n");
        for (t, fils) in &self.snapshots {
            for (i, f) in fils.iter().enumerate() {
                for (k, v) in f.vertices().iter().enumerate() {
                    writeln!(out, "{t:.12e},{i},{k},{:.12e},{:.12e},{:.12e}", v[0], v[1], v[2]).expect("string write");
                }
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Columns: time, G0, total_length, min_separation.
    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("time,G0,total_length,min_separation\n");
        for r in &self.summary {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e}",
                r.time, r.g0, r.total_length, r.min_separation
            )
            .expect("string write");
        }
        fs::write(path, out)?;
        Ok(())
    }
}
