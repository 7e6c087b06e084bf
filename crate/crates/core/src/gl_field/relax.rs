use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WntError};
use crate::finsler::{least_squares, WntStructure};
use crate::grid::GridDomain;
use crate::linalg::Vector;
use crate::optim::{minimize_ncg, NcgOptions, Objective};

use super::complex::ComplexGridField;
use super::energy::GlProblem;
use super::flow::{FlowState, GlFlow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOptions {
    /// Gradient-flow steps taken before the energy minimization.
    pub warmup_steps: usize,
    /// Flow time step; defaults to the stability bound.
    pub dt: Option<f64>,
    pub max_iter: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            warmup_steps: 200,
            dt: None,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelaxOutcome {
    pub field: ComplexGridField,
    pub energy: f64,
    /// `‖M⁻¹∇E_ε‖_{L²}` at the returned field.
    pub stationarity: f64,
    /// Whether `stationarity ≤ 1e-6·max(1, E_ε)`.
    pub converged: bool,
    pub iterations: usize,
    /// The gradient-flow segment that preceded the minimization.
    pub warmup: FlowState,
}

/// Relaxes `initial` (whose boundary trace stays fixed) to a steady state of the
/// flow: a gradient-flow segment followed by nonlinear conjugate-gradient
/// minimization of `E_ε` down to the steady-state threshold.
pub fn relax(s: &WntStructure<2>, initial: &ComplexGridField, eps: f64, opts: RelaxOptions) -> Result<RelaxOutcome> {
    let flow = GlFlow::new(s, initial.domain(), eps)?;
    let dt = opts.dt.unwrap_or(flow.dt_bound());
    let mut warm = FlowState::new(s, initial.clone(), eps)?;
    flow.run(&mut warm, dt, opts.warmup_steps)?;

    let problem = GlProblem::new(s, initial.domain(), eps)?;
    let n = problem.n;
    let mut x: Vec<f64> = warm.field.re().iter().chain(warm.field.im()).copied().collect();
    let mut g = vec![0.0; 2 * n];
    let mut energy = problem.value_and_gradient(&x, &mut g)?;
    let mut stat = problem.stationarity(&g);
    let mut iterations = 0;
    // the threshold depends on the final energy, which only decreases
    for _ in 0..4 {
        let tol = 1e-6 * energy.max(1.0);
        if stat <= tol {
            break;
        }
        let out = minimize_ncg(
            &problem,
            &mut x,
            NcgOptions {
                tol,
                max_iter: opts.max_iter.saturating_sub(iterations),
                initial_step: 1.0,
            },
        )?;
        iterations += out.iterations;
        energy = out.value;
        stat = out.stationarity;
        if !out.converged {
            break;
        }
    }
    let (re, im) = x.split_at(n);
    let field = ComplexGridField::from_parts(*initial.domain(), re.to_vec(), im.to_vec())?;
    Ok(RelaxOutcome {
        converged: stat <= 1e-6 * energy.max(1.0),
        field,
        energy,
        stationarity: stat,
        iterations,
        warmup: warm,
    })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LogSample {
    pub eps: f64,
    pub energy: f64,
    pub converged: bool,
    pub stationarity: f64,
    /// Energy-identity drift of the warm-up flow segment.
    pub flow_drift: f64,
    pub flow_monotone: bool,
    pub n_vortices: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LogExpansionFit {
    pub samples: Vec<LogSample>,
    /// Fitted coefficient of `|log ε|`.
    pub slope: f64,
    pub intercept: f64,
    /// Values of `ε` whose relaxation did not converge (left out of the fit).
    pub excluded: Vec<f64>,
}

/// Relaxes degree data for every `ε` and fits `E_ε ≈ slope·|log ε| + intercept`.
pub fn log_expansion_fit(
    s: &WntStructure<2>,
    domain: &GridDomain<2>,
    vortices: &[(Vector<2>, i32)],
    eps_list: &[f64],
    opts: RelaxOptions,
) -> Result<LogExpansionFit> {
    if eps_list.len() < 3 {
        return Err(WntError::InvalidInput(format!("need at least 3 eps values, got {}", eps_list.len())));
    }
    let samples: Vec<LogSample> = eps_list
        .par_iter()
        .map(|&eps| {
            let init = ComplexGridField::degree_data(*domain, vortices, eps);
            let out = relax(s, &init, eps, opts)?;
            Ok(LogSample {
                eps,
                energy: out.energy,
                converged: out.converged,
                stationarity: out.stationarity,
                flow_drift: out.warmup.dissipation_drift(),
                flow_monotone: out.warmup.energy_monotone(),
                n_vortices: super::vortices::detect_vortices(&out.field).len(),
            })
        })
        .collect::<Result<_>>()?;
    let kept: Vec<&LogSample> = samples.iter().filter(|s| s.converged).collect();
    let excluded = samples.iter().filter(|s| !s.converged).map(|s| s.eps).collect();
    if kept.len() < 2 {
        return Err(WntError::NonConvergence {
            solver: "log-expansion relaxations",
            iterations: samples.len(),
            residual: samples.iter().map(|s| s.stationarity).fold(0.0, f64::max),
        });
    }
    let xs: Vec<f64> = kept.iter().map(|s| s.eps.ln().abs()).collect();
    let ys: Vec<f64> = kept.iter().map(|s| s.energy).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(LogExpansionFit {
        samples,
        slope,
        intercept,
        excluded,
    })
}
