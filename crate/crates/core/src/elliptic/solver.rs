use crate::error::{Result, WntError};
use crate::finsler::WntStructure;
use crate::grid::GridField;
use crate::optim::{conjugate_gradient, minimize_ncg, NcgOptions, Objective};

use super::energy::{cell_weights, dirichlet_part};
use super::operator::LinearizedOperator;
use super::stencil::Stencil;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletOptions {
    /// Bound on the sup-norm of the discrete Euler–Lagrange residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl DirichletOptions {
    /// Default tolerance 1e-8 in 2D and 1e-7 in 3D.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            tol: if dim >= 3 { 1e-7 } else { 1e-8 },
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DirichletSolution<const D: usize> {
    pub u: GridField<D>,
    /// Sup-norm of the strong-form residual `−div ∂_ξH(Du) − f` over interior nodes.
    pub residual: f64,
    pub iterations: usize,
    /// Discrete energy after every solver iteration.
    pub energy_history: Vec<f64>,
}

/// The convex Dirichlet energy as a function of all node values; boundary nodes
/// are frozen by zeroing their gradient rows.
pub(crate) struct DirichletProblem<'a, const D: usize> {
    s: &'a WntStructure<D>,
    stencil: Stencil<D>,
    weights: Vec<f64>,
    load: Vec<f64>,
    precond: LinearizedOperator<D>,
    vol: f64,
}

impl<'a, const D: usize> DirichletProblem<'a, D> {
    pub fn new(s: &'a WntStructure<D>, f: &GridField<D>) -> Result<Self> {
        let dom = f.domain();
        let load = (0..dom.num_nodes()).map(|i| dom.node_weight(i) * f.values()[i]).collect();
        Ok(Self {
            s,
            stencil: Stencil::new(dom),
            weights: cell_weights(s, dom)?,
            load,
            precond: LinearizedOperator::constant(dom, *s.anisotropy().g_inv())?,
            vol: dom.cell_volume(),
        })
    }

    /// Strong-form residual sup-norm of a gradient vector.
    pub fn residual(&self, grad: &[f64]) -> f64 {
        grad.iter()
            .enumerate()
            .filter(|(i, _)| !self.stencil.boundary[*i])
            .fold(0.0f64, |m, (_, g)| m.max(g.abs()))
            / self.vol
    }
}

impl<const D: usize> Objective for DirichletProblem<'_, D> {
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        let e = dirichlet_part(self.s, &self.stencil, &self.weights, x, Some(grad))?;
        let mut load = 0.0;
        for i in 0..x.len() {
            load += self.load[i] * x[i];
            if self.stencil.boundary[i] {
                grad[i] = 0.0;
            } else {
                grad[i] -= self.load[i];
            }
        }
        Ok(e - load)
    }

    fn stationarity(&self, grad: &[f64]) -> f64 {
        self.residual(grad)
    }

    fn precondition(&self, grad: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|v| *v = 0.0);
        match conjugate_gradient(|p, o| self.precond.apply(p, o), grad, out, 1e-6, 4 * grad.len()) {
            Ok(_) | Err(WntError::NonConvergence { .. }) => Ok(()),
            Err(e) => Err(e),
        }
    }
}

/// Minimizes the Dirichlet energy with `u = boundary` on the boundary faces,
/// starting from `initial` (or from the boundary data extended by zero).
pub fn solve_dirichlet<const D: usize>(
    s: &WntStructure<D>,
    f: &GridField<D>,
    boundary: &GridField<D>,
    initial: Option<&GridField<D>>,
    opts: DirichletOptions,
) -> Result<DirichletSolution<D>> {
    if !(opts.tol > 0.0) {
        return Err(WntError::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    f.domain().check_compatible(boundary.domain())?;
    let dom = *f.domain();
    if boundary.values().iter().any(|v| !v.is_finite()) || f.values().iter().any(|v| !v.is_finite()) {
        return Err(WntError::InvalidInput("non-finite source or boundary values".into()));
    }
    let mut u = match initial {
        Some(init) => {
            dom.check_compatible(init.domain())?;
            init.clone()
        }
        None => GridField::zeros(dom),
    };
    u.set_boundary_from(boundary)?;
    let problem = DirichletProblem::new(s, f)?;
    let out = minimize_ncg(
        &problem,
        u.values_mut(),
        NcgOptions {
            tol: opts.tol,
            max_iter: opts.max_iter,
            initial_step: 1.0,
        },
    )?;
    if !out.converged {
        return Err(WntError::NonConvergence {
            solver: "Dirichlet nonlinear conjugate gradient",
            iterations: out.iterations,
            residual: out.stationarity,
        });
    }
    Ok(DirichletSolution {
        u,
        residual: out.stationarity,
        iterations: out.iterations,
        energy_history: out.history,
    })
}

/// Strong-form residual of a candidate solution, for independent checking.
pub fn dirichlet_residual<const D: usize>(s: &WntStructure<D>, f: &GridField<D>, u: &GridField<D>) -> Result<f64> {
    f.domain().check_compatible(u.domain())?;
    let problem = DirichletProblem::new(s, f)?;
    let mut g = vec![0.0; u.values().len()];
    problem.value_and_gradient(u.values(), &mut g)?;
    Ok(problem.residual(&g))
}
