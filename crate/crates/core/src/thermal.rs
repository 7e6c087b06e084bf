//! Stationary heat equation sourced by Ginzburg–Landau core heating, with the
//! temperature normalized to zero mean.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elliptic::{central_gradient, green_kernel, LinearizedOperator};
use crate::error::{Result, WntError};
use crate::finsler::WntStructure;
use crate::gl_field::{detect_vortices, double_well, energy_density, ComplexGridField, FlowState, GlFlow};
use crate::grid::{GridDomain, GridField};
use crate::linalg::{self, Vector};

/// Which nodal density feeds the heat equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HeatModel {
    /// `q = (1 − |u|²)²/(4ε²)`, concentrated in the vortex cores.
    #[default]
    Potential,
    /// The full nodal energy density.
    EnergyDensity,
}

/// Nonnegative heat source with the coupling constants `σ` and `κ_th`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatSource<const D: usize> {
    q: GridField<D>,
    sigma: f64,
    kappa_th: f64,
}

impl<const D: usize> HeatSource<D> {
    pub fn new(q: GridField<D>, sigma: f64, kappa_th: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(WntError::InvalidInput(format!("sigma must be >= 0, got {sigma}")));
        }
        if !(kappa_th > 0.0 && kappa_th.is_finite()) {
            return Err(WntError::InvalidInput(format!("kappa_th must be positive, got {kappa_th}")));
        }
        if let Some(i) = q.values().iter().position(|v| !(*v >= 0.0)) {
            return Err(WntError::InvalidInput(format!("heat source is negative at node {i}")));
        }
        Ok(Self { q, sigma, kappa_th })
    }

    /// Unit heat mass at one node.
    pub fn point(domain: GridDomain<D>, node: usize, sigma: f64, kappa_th: f64) -> Result<Self> {
        if node >= domain.num_nodes() {
            return Err(WntError::InvalidInput(format!("node {node} out of range")));
        }
        let mut q = GridField::zeros(domain);
        q.values_mut()[node] = 1.0 / domain.node_weight(node);
        Self::new(q, sigma, kappa_th)
    }

    pub fn domain(&self) -> &GridDomain<D> {
        self.q.domain()
    }

    pub fn q(&self) -> &GridField<D> {
        &self.q
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kappa_th(&self) -> f64 {
        self.kappa_th
    }

    /// `∫ q dμ` by the trapezoid rule.
    pub fn total_mass(&self) -> f64 {
        let dom = self.q.domain();
        (0..dom.num_nodes()).map(|i| dom.node_weight(i) * self.q.values()[i]).sum()
    }

    /// Sum of two sources on the same grid with the same constants.
    pub fn superpose(&self, other: &Self) -> Result<Self> {
        self.domain().check_compatible(other.domain())?;
        if self.sigma != other.sigma || self.kappa_th != other.kappa_th {
            return Err(WntError::InvalidInput("superposed sources use different constants".into()));
        }
        let vals = self.q.values().iter().zip(other.q.values()).map(|(a, b)| a + b).collect();
        Self::new(GridField::from_values(*self.domain(), vals)?, self.sigma, self.kappa_th)
    }

    /// Same density with a different `σ`.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.q.clone(), sigma, self.kappa_th)
    }

    /// Fraction of the heat mass on nodes within `radius` of any center.
    pub fn mass_fraction_near(&self, centers: &[Vector<D>], radius: f64) -> f64 {
        let dom = self.q.domain();
        let total = self.total_mass();
        if total == 0.0 {
            return 0.0;
        }
        let near: f64 = (0..dom.num_nodes())
            .filter(|&i| {
                let p = dom.node_position(i);
                centers.iter().any(|c| linalg::norm(&linalg::sub(&p, c)) <= radius)
            })
            .map(|i| dom.node_weight(i) * self.q.values()[i])
            .sum();
        near / total
    }
}

/// Core heating `q_ε = (1 − |u|²)²/(4ε²)`.
pub fn heat_source_from_field(u: &ComplexGridField, eps: f64, sigma: f64, kappa_th: f64) -> Result<HeatSource<2>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(WntError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let inv = 1.0 / (eps * eps);
    let vals = (0..u.len()).map(|i| double_well(u.modulus(i)) * inv).collect();
    HeatSource::new(GridField::from_values(*u.domain(), vals)?, sigma, kappa_th)
}

/// Heat source for either model.
pub fn heat_source(
    model: HeatModel,
    s: &WntStructure<2>,
    u: &ComplexGridField,
    eps: f64,
    sigma: f64,
    kappa_th: f64,
) -> Result<HeatSource<2>> {
    match model {
        HeatModel::Potential => heat_source_from_field(u, eps, sigma, kappa_th),
        HeatModel::EnergyDensity => {
            let q = energy_density(s, u, eps)?;
            // round-off can leave tiny negative Hamiltonian values
            let vals = q.values().iter().map(|v| v.max(0.0)).collect();
            HeatSource::new(GridField::from_values(*u.domain(), vals)?, sigma, kappa_th)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureSolution<const D: usize> {
    /// Mean-zero temperature.
    pub temperature: GridField<D>,
    /// Constant removed from the Dirichlet solution.
    pub shift: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `−κ_th div(A∇T) = σ(q − q̄)` with zero boundary values and removes
/// the mean of the result.
pub fn solve_temperature<const D: usize>(
    src: &HeatSource<D>,
    op: &LinearizedOperator<D>,
    tol: f64,
) -> Result<TemperatureSolution<D>> {
    let dom = *src.domain();
    dom.check_compatible(op.domain())?;
    let qbar = src.q.mean();
    let c = src.sigma / src.kappa_th;
    let b: Vec<f64> = (0..dom.num_nodes())
        .map(|i| c * dom.node_weight(i) * (src.q.values()[i] - qbar))
        .collect();
    let mut t = vec![0.0; dom.num_nodes()];
    let out = op.solve(&b, &mut t, tol, 20 * dom.num_nodes())?;
    let mut field = GridField::from_values(dom, t)?;
    let shift = field.mean();
    field.values_mut().iter_mut().for_each(|v| *v -= shift);
    // a second pass removes the round-off left by the first
    let rest = field.mean();
    field.values_mut().iter_mut().for_each(|v| *v -= rest);
    Ok(TemperatureSolution {
        temperature: field,
        shift: shift + rest,
        iterations: out.iterations,
        relative_residual: out.relative_residual,
    })
}

/// `(σ/κ_th) ∇T` by central differences.
pub fn thermal_drift_field<const D: usize>(t: &GridField<D>, sigma: f64, kappa_th: f64) -> Result<Vec<Vector<D>>> {
    if !(kappa_th > 0.0) {
        return Err(WntError::InvalidInput(format!("kappa_th must be positive, got {kappa_th}")));
    }
    let c = sigma / kappa_th;
    Ok(central_gradient(t).into_iter().map(|g| linalg::scale(&g, c)).collect())
}

/// Point-source temperature against the Green representation on an annulus
/// around the pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenRepresentationCheck {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    /// `max |T − (σ/κ)(G − Ḡ)| / max |(σ/κ)(G − Ḡ)|` on the annulus.
    pub pointwise_error: f64,
    /// Same comparison after removing each side's annulus average.
    pub profile_error: f64,
}

pub fn check_green_representation<const D: usize>(
    op: &LinearizedOperator<D>,
    pole: usize,
    sigma: f64,
    kappa_th: f64,
    r_min: f64,
    r_max: f64,
    tol: f64,
) -> Result<GreenRepresentationCheck> {
    let dom = *op.domain();
    let src = HeatSource::point(dom, pole, sigma, kappa_th)?;
    let t = solve_temperature(&src, op, tol)?.temperature;
    let g = green_kernel(op, pole, tol)?;
    let gm = g.mean();
    let c = sigma / kappa_th;
    let center = dom.node_position(pole);
    let ring: Vec<usize> = (0..dom.num_nodes())
        .filter(|&i| {
            let r = linalg::norm(&linalg::sub(&dom.node_position(i), &center));
            r >= r_min && r <= r_max && !dom.is_boundary(i)
        })
        .collect();
    if ring.is_empty() {
        return Err(WntError::InvalidInput(format!("no interior nodes in the annulus [{r_min}, {r_max}]")));
    }
    let reference: Vec<f64> = ring.iter().map(|&i| c * (g.values()[i] - gm)).collect();
    let temp: Vec<f64> = ring.iter().map(|&i| t.values()[i]).collect();
    let n = ring.len() as f64;
    let (rm, tm) = (reference.iter().sum::<f64>() / n, temp.iter().sum::<f64>() / n);
    let mut abs_err: f64 = 0.0;
    let mut abs_ref: f64 = 0.0;
    let mut prof_err: f64 = 0.0;
    let mut prof_ref: f64 = 0.0;
    for (r, x) in reference.iter().zip(&temp) {
        abs_err = abs_err.max((x - r).abs());
        abs_ref = abs_ref.max(r.abs());
        prof_err = prof_err.max(((x - tm) - (r - rm)).abs());
        prof_ref = prof_ref.max((r - rm).abs());
    }
    Ok(GreenRepresentationCheck {
        r_min,
        r_max,
        nodes: ring.len(),
        pointwise_error: abs_err / abs_ref,
        profile_error: prof_err / prof_ref,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalCouplingOptions {
    pub model: HeatModel,
    pub sigma: f64,
    pub kappa_th: f64,
    /// Temperature re-solve interval in flow steps.
    pub resolve_every: usize,
    pub steps: usize,
    /// Flow step; the stability bound when absent.
    pub dt: Option<f64>,
    pub tol: f64,
}

impl Default for ThermalCouplingOptions {
    fn default() -> Self {
        Self {
            model: HeatModel::Potential,
            sigma: 1.0,
            kappa_th: 1.0,
            resolve_every: 10,
            steps: 100,
            dt: None,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub heat_mass: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_mean: f64,
    pub n_vortices: usize,
    /// Largest drift magnitude interpolated at the detected vortices.
    pub max_core_drift: f64,
}

#[derive(Debug, Clone)]
pub struct ThermalRun {
    pub flow: FlowState,
    pub temperature: GridField<2>,
    pub records: Vec<ThermalRecord>,
}

impl ThermalRun {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("step,time,energy,heat_mass,t_min,t_max,t_mean,n_vortices,max_core_drift\n");
        for r in &self.records {
            writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.12e}",
                r.step, r.time, r.energy, r.heat_mass, r.t_min, r.t_max, r.t_mean, r.n_vortices, r.max_core_drift
            )
            .expect("string write");
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Operator splitting: GL flow steps, with the temperature re-solved from the
/// current field every `resolve_every` steps. The heat operator is frozen at
/// the vacuum state, `A = D²H(x, 0) = g⁻¹`. The temperature does not feed back
/// into the field.
pub fn run_thermal_coupled(
    s: &WntStructure<2>,
    initial: &ComplexGridField,
    eps: f64,
    opts: ThermalCouplingOptions,
) -> Result<ThermalRun> {
    if opts.resolve_every == 0 {
        return Err(WntError::InvalidInput("resolve_every must be at least 1".into()));
    }
    let dom = *initial.domain();
    let op = LinearizedOperator::constant(&dom, *s.anisotropy().g_inv())?;
    let flow = GlFlow::new(s, &dom, eps)?;
    let dt = opts.dt.unwrap_or(flow.dt_bound());
    let mut state = FlowState::new(s, initial.clone(), eps)?;
    let mut records = Vec::new();
    let mut temperature = GridField::zeros(dom);
    for step in 0..=opts.steps {
        if step > 0 {
            flow.step(&mut state, dt)?;
        }
        if step % opts.resolve_every == 0 || step == opts.steps {
            let src = heat_source(opts.model, s, &state.field, eps, opts.sigma, opts.kappa_th)?;
            temperature = solve_temperature(&src, &op, opts.tol)?.temperature;
            let drift = thermal_drift_field(&temperature, opts.sigma, opts.kappa_th)?;
            let vort = detect_vortices(&state.field);
            let mut max_core_drift: f64 = 0.0;
            for c in &vort.centers {
                let stencil = dom.interpolation_stencil(c)?;
                let mut v = [0.0; 2];
                for (i, w) in stencil {
                    linalg::axpy(&mut v, w, &drift[i]);
                }
                max_core_drift = max_core_drift.max(linalg::norm(&v));
            }
            let vals = temperature.values();
            records.push(ThermalRecord {
                step,
                time: state.time,
                energy: state.energy(),
                heat_mass: src.total_mass(),
                t_min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                t_max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                t_mean: temperature.mean(),
                n_vortices: vort.len(),
                max_core_drift,
            });
        }
    }
    Ok(ThermalRun {
        flow: state,
        temperature,
        records,
    })
}
