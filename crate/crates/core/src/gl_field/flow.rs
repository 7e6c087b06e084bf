use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Result, WntError};
use crate::finsler::WntStructure;
use crate::grid::GridDomain;

use super::complex::ComplexGridField;
use super::energy::GlProblem;
use super::vortices::detect_vortices;

/// Relative size of energy changes treated as evaluation round-off.
pub const ENERGY_ROUNDOFF: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    /// `‖Δu/Δt‖²_{L²}·Δt` of the step that produced this record.
    pub dissipation_increment: f64,
    pub n_vortices: usize,
}

/// A field evolving under the `L²` gradient flow of `E_ε`.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub field: ComplexGridField,
    pub time: f64,
    pub eps: f64,
    pub history: Vec<FlowRecord>,
    /// Trial steps discarded because the energy went up.
    pub rejected: usize,
    /// `‖Δu/Δt‖_{L²}` of the last accepted step.
    pub last_velocity: f64,
}

impl FlowState {
    pub fn new(s: &WntStructure<2>, field: ComplexGridField, eps: f64) -> Result<Self> {
        let p = GlProblem::new(s, field.domain(), eps)?;
        let (d, w) = p.energy_parts(field.re(), field.im())?;
        let n = detect_vortices(&field).len();
        Ok(Self {
            history: vec![FlowRecord {
                step: 0,
                time: 0.0,
                energy: d + w,
                dissipation_increment: 0.0,
                n_vortices: n,
            }],
            field,
            time: 0.0,
            eps,
            rejected: 0,
            last_velocity: f64::INFINITY,
        })
    }

    pub fn energy(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.energy)
    }

    pub fn initial_energy(&self) -> f64 {
        self.history[0].energy
    }

    pub fn total_dissipation(&self) -> f64 {
        self.history.iter().map(|r| r.dissipation_increment).sum()
    }

    /// `|E(t) + Σ dissipation − E(0)| / E(0)`.
    pub fn dissipation_drift(&self) -> f64 {
        let e0 = self.initial_energy();
        (self.energy() + self.total_dissipation() - e0).abs() / e0.abs().max(f64::MIN_POSITIVE)
    }

    /// The same balance relative to the dissipated energy `E(0) − E(t)`.
    pub fn dissipation_drift_of_decrease(&self) -> f64 {
        let dec = self.initial_energy() - self.energy();
        (self.energy() + self.total_dissipation() - self.initial_energy()).abs() / dec.abs().max(f64::MIN_POSITIVE)
    }

    pub fn energy_monotone(&self) -> bool {
        self.history
            .windows(2)
            .all(|w| w[1].energy <= w[0].energy + ENERGY_ROUNDOFF * w[0].energy.abs())
    }

    /// `‖Δu/Δt‖_{L²} ≤ 1e-6·max(1, E)`.
    pub fn is_steady(&self) -> bool {
        self.last_velocity <= 1e-6 * self.energy().max(1.0)
    }

    /// Columns: step, time, energy, dissipation_increment, n_vortices.
    pub fn write_history_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("step,time,energy,dissipation_increment,n_vortices\n");
        for r in &self.history {
            writeln!(out, "{},{:.12e},{:.12e},{:.12e},{}", r.step, r.time, r.energy, r.dissipation_increment, r.n_vortices)
                .expect("string write");
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Explicit-diffusion bound `0.2·h²/L` with `L` the bound on `D²H`.
pub fn cfl_bound(s: &WntStructure<2>, domain: &GridDomain<2>) -> f64 {
    let h = domain.h_min();
    0.2 * h * h / s.anisotropy().dual_hessian_bound()
}

/// Reusable stepping context for one structure, grid and `ε`.
pub struct GlFlow<'a> {
    problem: GlProblem<'a>,
    bound: f64,
    /// Vortex detection runs every this many steps (counts carry over between).
    pub detect_every: usize,
}

impl<'a> GlFlow<'a> {
    pub fn new(s: &'a WntStructure<2>, domain: &GridDomain<2>, eps: f64) -> Result<Self> {
        Ok(Self {
            problem: GlProblem::new(s, domain, eps)?,
            bound: cfl_bound(s, domain),
            detect_every: 50,
        })
    }

    pub fn dt_bound(&self) -> f64 {
        self.bound
    }

    /// One step: explicit update with the divergence term, then the exact
    /// solution of `u̇ = (1 − |u|²)u/ε²` at every interior node. A step that
    /// raises the energy is discarded and retried with half the time step.
    pub fn step(&self, state: &mut FlowState, dt: f64) -> Result<()> {
        if !(dt > 0.0) || dt > self.bound * (1.0 + 1e-12) {
            return Err(WntError::StepRejected { dt, bound: self.bound });
        }
        if state.eps != self.problem.eps {
            return Err(WntError::InvalidInput("flow state and stepper use different eps".into()));
        }
        let p = &self.problem;
        let n = p.n;
        let mut g_re = vec![0.0; n];
        let mut g_im = vec![0.0; n];
        p.dirichlet_gradient(state.field.re(), state.field.im(), &mut g_re, &mut g_im)?;
        let e_old = state.energy();
        let mut trial_dt = dt;
        for _ in 0..12 {
            let mut next = state.field.clone();
            {
                let (re, im) = next.parts_mut();
                let k = 2.0 * trial_dt / (p.eps * p.eps);
                let growth = k.exp();
                for i in 0..n {
                    if p.is_boundary(i) {
                        continue;
                    }
                    let r = re[i] - trial_dt * g_re[i] / p.node_w[i];
                    let m = im[i] - trial_dt * g_im[i] / p.node_w[i];
                    let r2 = r * r + m * m;
                    // ρ² ↦ ρ²e^{2t/ε²}/(1 − ρ² + ρ²e^{2t/ε²})
                    let scale = if r2 > 0.0 {
                        (growth / (1.0 - r2 + r2 * growth)).sqrt()
                    } else {
                        1.0
                    };
                    re[i] = r * scale;
                    im[i] = m * scale;
                }
            }
            let (d, w) = p.energy_parts(next.re(), next.im())?;
            let e_new = d + w;
            if e_new <= e_old + ENERGY_ROUNDOFF * e_old.abs() {
                let mut diss = 0.0;
                for i in 0..n {
                    if !p.is_boundary(i) {
                        let dr = next.re()[i] - state.field.re()[i];
                        let di = next.im()[i] - state.field.im()[i];
                        diss += p.node_w[i] * (dr * dr + di * di);
                    }
                }
                let step = state.history.last().map_or(0, |r| r.step) + 1;
                let n_vortices = if step.is_multiple_of(self.detect_every.max(1)) {
                    detect_vortices(&next).len()
                } else {
                    state.history.last().map_or(0, |r| r.n_vortices)
                };
                state.field = next;
                state.time += trial_dt;
                state.last_velocity = (diss / (trial_dt * trial_dt)).sqrt();
                state.history.push(FlowRecord {
                    step,
                    time: state.time,
                    energy: e_new,
                    dissipation_increment: diss / trial_dt,
                    n_vortices,
                });
                return Ok(());
            }
            state.rejected += 1;
            trial_dt *= 0.5;
        }
        Err(WntError::NonConvergence {
            solver: "gradient-flow step (energy increase persists under step halving)",
            iterations: 12,
            residual: trial_dt,
        })
    }

    /// Runs up to `steps` steps, stopping early once the state is steady.
    pub fn run(&self, state: &mut FlowState, dt: f64, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(state, dt)?;
            if state.is_steady() {
                break;
            }
        }
        Ok(())
    }
}

/// One flow step on a copy of the state.
pub fn flow_step(s: &WntStructure<2>, state: &FlowState, dt: f64) -> Result<FlowState> {
    let flow = GlFlow::new(s, state.field.domain(), state.eps)?;
    let mut next = state.clone();
    flow.step(&mut next, dt)?;
    Ok(next)
}
