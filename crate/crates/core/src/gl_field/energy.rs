use rayon::prelude::*;

use crate::elliptic::stencil::Stencil;
use crate::elliptic::{cell_hamiltonian, cell_weights, LinearizedOperator};
use crate::error::{Result, WntError};
use crate::finsler::WntStructure;
use crate::grid::{GridDomain, GridField};
use crate::linalg::Vector;
use crate::optim::{conjugate_gradient, Objective};

use super::complex::ComplexGridField;

/// Double-well `W(s) = ¼(1 − s²)²`.
pub fn double_well(s: f64) -> f64 {
    0.25 * (1.0 - s * s).powi(2)
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(WntError::InvalidInput(format!("eps must be positive and finite, got {eps}")))
    }
}

/// `E_ε` on a flattened `[Re u, Im u]` vector; boundary nodes are frozen.
pub(crate) struct GlProblem<'a> {
    pub s: &'a WntStructure<2>,
    pub stencil: Stencil<2>,
    pub weights: Vec<f64>,
    pub node_w: Vec<f64>,
    pub eps: f64,
    pub n: usize,
    precond: LinearizedOperator<2>,
}

impl<'a> GlProblem<'a> {
    pub fn new(s: &'a WntStructure<2>, domain: &GridDomain<2>, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self {
            s,
            stencil: Stencil::new(domain),
            weights: cell_weights(s, domain)?,
            node_w: (0..domain.num_nodes()).map(|i| domain.node_weight(i)).collect(),
            eps,
            n: domain.num_nodes(),
            precond: LinearizedOperator::constant(domain, *s.anisotropy().g_inv())?,
        })
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.stencil.boundary[i]
    }

    /// Per-cell `(H(D Re u) + H(D Im u), ∂H(D Re u), ∂H(D Im u))`.
    fn cell_terms(&self, re: &[f64], im: &[f64]) -> Result<Vec<(f64, Vector<2>, Vector<2>)>> {
        self.stencil
            .cell_base
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(&b, &a)| {
                let (hr, yr) = cell_hamiltonian(self.s, a, &self.stencil.gradient(re, b))?;
                let (hi, yi) = cell_hamiltonian(self.s, a, &self.stencil.gradient(im, b))?;
                Ok((hr + hi, yr, yi))
            })
            .collect()
    }

    /// Dirichlet and potential parts of the energy.
    pub fn energy_parts(&self, re: &[f64], im: &[f64]) -> Result<(f64, f64)> {
        let vol = self.stencil.domain.cell_volume();
        let dirichlet = self.cell_terms(re, im)?.iter().map(|t| t.0).sum::<f64>() * vol;
        let inv = 1.0 / (self.eps * self.eps);
        let potential: f64 = (0..self.n)
            .map(|i| self.node_w[i] * double_well(re[i].hypot(im[i])) * inv)
            .sum();
        Ok((dirichlet, potential))
    }

    /// Gradient of the Dirichlet part only, written into `[g_re, g_im]`.
    pub fn dirichlet_gradient(&self, re: &[f64], im: &[f64], g_re: &mut [f64], g_im: &mut [f64]) -> Result<f64> {
        let vol = self.stencil.domain.cell_volume();
        let terms = self.cell_terms(re, im)?;
        let mut fr = vec![[0.0; 2]; self.n];
        let mut fi = vec![[0.0; 2]; self.n];
        let mut e = 0.0;
        for (&b, (h, yr, yi)) in self.stencil.cell_base.iter().zip(&terms) {
            e += h;
            fr[b] = [vol * yr[0], vol * yr[1]];
            fi[b] = [vol * yi[0], vol * yi[1]];
        }
        self.stencil.adjoint(&fr, g_re, true);
        self.stencil.adjoint(&fi, g_im, true);
        Ok(e * vol)
    }

    /// `‖M⁻¹g‖_{L²}` with the lumped node mass `M`, over interior nodes.
    pub fn l2_velocity(&self, g: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            if !self.is_boundary(i) {
                acc += (g[i] * g[i] + g[self.n + i] * g[self.n + i]) / self.node_w[i];
            }
        }
        acc.sqrt()
    }
}

impl Objective for GlProblem<'_> {
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        let n = self.n;
        let (re, im) = x.split_at(n);
        let (g_re, g_im) = grad.split_at_mut(n);
        let ed = self.dirichlet_gradient(re, im, g_re, g_im)?;
        let inv = 1.0 / (self.eps * self.eps);
        let mut ep = 0.0;
        for i in 0..n {
            let m2 = re[i] * re[i] + im[i] * im[i];
            ep += self.node_w[i] * 0.25 * (1.0 - m2).powi(2) * inv;
            if !self.is_boundary(i) {
                // ∂/∂u of ¼(1 − |u|²)² is −(1 − |u|²)u
                let c = -self.node_w[i] * (1.0 - m2) * inv;
                g_re[i] += c * re[i];
                g_im[i] += c * im[i];
            }
        }
        Ok(ed + ep)
    }

    fn stationarity(&self, grad: &[f64]) -> f64 {
        self.l2_velocity(grad)
    }

    /// Inverse of the quadratic part shifted by `ε⁻²M`, applied per component.
    fn precondition(&self, grad: &[f64], out: &mut [f64]) -> Result<()> {
        let shift = 1.0 / (self.eps * self.eps);
        let n = self.n;
        let apply = |p: &[f64], o: &mut [f64]| {
            self.precond.apply(p, o);
            for i in 0..n {
                if !self.is_boundary(i) {
                    o[i] += shift * self.node_w[i] * p[i];
                }
            }
        };
        out.iter_mut().for_each(|v| *v = 0.0);
        let (o_re, o_im) = out.split_at_mut(n);
        for (g, o) in [(&grad[..n], o_re), (&grad[n..], o_im)] {
            match conjugate_gradient(apply, g, o, 1e-6, 2000) {
                Ok(_) | Err(WntError::NonConvergence { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

/// `E_ε(u) = Σ_c vol·[H(D Re u) + H(D Im u)] + Σ_i w_i·(1 − |u_i|²)²/(4ε²)`.
pub fn energy_eps(s: &WntStructure<2>, u: &ComplexGridField, eps: f64) -> Result<f64> {
    let p = GlProblem::new(s, u.domain(), eps)?;
    let (d, w) = p.energy_parts(u.re(), u.im())?;
    Ok(d + w)
}

/// Dirichlet part of `E_ε` restricted to cells whose center satisfies `keep`.
pub fn dirichlet_energy_in(s: &WntStructure<2>, u: &ComplexGridField, keep: impl Fn(&Vector<2>) -> bool + Sync) -> Result<f64> {
    let dom = u.domain();
    let st = Stencil::new(dom);
    let w = cell_weights(s, dom)?;
    let vol = dom.cell_volume();
    let parts: Vec<f64> = (0..dom.num_cells())
        .into_par_iter()
        .map(|c| {
            if !keep(&dom.cell_center(c)) {
                return Ok(0.0);
            }
            let b = st.cell_base[c];
            let (hr, _) = cell_hamiltonian(s, w[c], &st.gradient(u.re(), b))?;
            let (hi, _) = cell_hamiltonian(s, w[c], &st.gradient(u.im(), b))?;
            Ok(hr + hi)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum::<f64>() * vol)
}

/// Nodal energy density: the potential density plus the mean Dirichlet density
/// of the cells touching the node.
pub fn energy_density(s: &WntStructure<2>, u: &ComplexGridField, eps: f64) -> Result<GridField<2>> {
    let p = GlProblem::new(s, u.domain(), eps)?;
    let dom = u.domain();
    let terms = p.cell_terms(u.re(), u.im())?;
    let mut acc = vec![0.0; p.n];
    let mut cnt = vec![0u32; p.n];
    for (c, t) in terms.iter().enumerate() {
        let b = p.stencil.cell_base[c];
        for node in [b, b + 1, b + p.stencil.strides[1], b + p.stencil.strides[1] + 1] {
            acc[node] += t.0;
            cnt[node] += 1;
        }
    }
    let inv = 1.0 / (eps * eps);
    let vals = (0..p.n)
        .map(|i| acc[i] / cnt[i] as f64 + double_well(u.modulus(i)) * inv)
        .collect();
    GridField::from_values(*dom, vals)
}
