use rayon::prelude::*;

use crate::error::{Result, WntError};
use crate::finsler::WntStructure;
use crate::grid::{GridDomain, GridField};
use crate::linalg::{self, Matrix};
use crate::optim::{conjugate_gradient, CgOutcome};

use super::energy::cell_weights;
use super::stencil::Stencil;

#[derive(Debug, Clone, PartialEq)]
enum Coefficients<const D: usize> {
    Constant(Matrix<D>),
    PerCell(Vec<Matrix<D>>),
}

/// Frozen divergence-form operator `u ↦ −div(A∇u)` with one SPD matrix per
/// cell and zero Dirichlet data, assembled as `Σ_c vol·D_cᵀ A_c D_c`.
#[derive(Debug, Clone)]
pub struct LinearizedOperator<const D: usize> {
    stencil: Stencil<D>,
    coeffs: Coefficients<D>,
    m: f64,
    l: f64,
}

fn eig_bounds<const D: usize>(a: &Matrix<D>) -> (f64, f64) {
    let ev = linalg::sym_eigenvalues(a);
    (ev[0], ev[D - 1])
}

impl<const D: usize> LinearizedOperator<D> {
    /// Operator with the same matrix in every cell.
    pub fn constant(domain: &GridDomain<D>, a: Matrix<D>) -> Result<Self> {
        if !linalg::is_symmetric(&a, 1e-12) {
            return Err(WntError::DegenerateFiber("coefficient matrix not symmetric".into()));
        }
        let (m, l) = eig_bounds(&a);
        if !(m > 0.0) {
            return Err(WntError::DegenerateFiber(format!("coefficient matrix not positive definite (λmin = {m})")));
        }
        Ok(Self {
            stencil: Stencil::new(domain),
            coeffs: Coefficients::Constant(a),
            m,
            l,
        })
    }

    /// `−Δ` on the given grid.
    pub fn laplacian(domain: &GridDomain<D>) -> Self {
        Self::constant(domain, linalg::identity()).expect("identity is SPD")
    }

    /// Operator with cell matrices in cell order.
    pub fn from_cells(domain: &GridDomain<D>, cells: Vec<Matrix<D>>) -> Result<Self> {
        if cells.len() != domain.num_cells() {
            return Err(WntError::GridMismatch(format!(
                "{} cell matrices for {} cells",
                cells.len(),
                domain.num_cells()
            )));
        }
        let mut m = f64::INFINITY;
        let mut l: f64 = 0.0;
        for (c, a) in cells.iter().enumerate() {
            let (lo, hi) = eig_bounds(a);
            if !linalg::is_symmetric(a, 1e-10 * (1.0 + hi.abs())) || !(lo > 0.0) || !hi.is_finite() {
                return Err(WntError::DegenerateFiber(format!(
                    "cell {c} (multi-index {:?}) is not SPD: eigenvalue range [{lo}, {hi}]",
                    domain.cell_multi(c)
                )));
            }
            m = m.min(lo);
            l = l.max(hi);
        }
        Ok(Self {
            stencil: Stencil::new(domain),
            coeffs: Coefficients::PerCell(cells),
            m,
            l,
        })
    }

    pub fn domain(&self) -> &GridDomain<D> {
        &self.stencil.domain
    }

    /// Smallest eigenvalue over all cells.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Largest eigenvalue over all cells.
    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn cell_matrix(&self, cell: usize) -> &Matrix<D> {
        match &self.coeffs {
            Coefficients::Constant(a) => a,
            Coefficients::PerCell(v) => &v[cell],
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.coeffs, Coefficients::Constant(_))
    }

    /// `out = K x` over all nodes, with `x` read everywhere. Boundary rows of the
    /// output are zeroed when `mask_boundary` is set.
    pub(crate) fn apply_raw(&self, x: &[f64], out: &mut [f64], mask_boundary: bool) {
        let st = &self.stencil;
        let vol = st.domain.cell_volume();
        let mut flux = vec![[0.0; D]; x.len()];
        let fluxes: Vec<[f64; D]> = st
            .cell_base
            .par_iter()
            .enumerate()
            .map(|(c, &b)| linalg::scale(&linalg::matvec(self.cell_matrix(c), &st.gradient(x, b)), vol))
            .collect();
        for (&b, fl) in st.cell_base.iter().zip(fluxes) {
            flux[b] = fl;
        }
        st.adjoint(&flux, out, mask_boundary);
    }

    /// Applies the Dirichlet operator to a vector that vanishes on the boundary.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.apply_raw(x, out, true);
    }

    /// Solves `K x = b` on interior nodes with zero boundary values.
    pub fn solve(&self, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<CgOutcome> {
        let mut rhs = b.to_vec();
        for (i, r) in rhs.iter_mut().enumerate() {
            if self.stencil.boundary[i] {
                *r = 0.0;
            }
        }
        for (i, v) in x.iter_mut().enumerate() {
            if self.stencil.boundary[i] {
                *v = 0.0;
            }
        }
        conjugate_gradient(|p, out| self.apply(p, out), &rhs, x, rel_tol, max_iter)
    }
}

/// Freezes the dual Hessian `D²_{ξξ}H(x_c, D_c u)` in every cell.
pub fn linearize<const D: usize>(s: &WntStructure<D>, u: &GridField<D>) -> Result<LinearizedOperator<D>> {
    let dom = u.domain();
    let st = Stencil::new(dom);
    let weights = cell_weights(s, dom)?;
    let cells: Vec<Matrix<D>> = st
        .cell_base
        .par_iter()
        .zip(weights.par_iter())
        .enumerate()
        .map(|(c, (&b, &a))| {
            let xi = st.gradient(u.values(), b);
            if a == 0.0 {
                return Ok(*s.anisotropy().g_inv());
            }
            let pair = s.invert_with_weight(a, &xi)?;
            s.dual_hessian_at_primal(a, &pair.y).map_err(|e| {
                WntError::DegenerateFiber(format!("cell {c} (multi-index {:?}): {e}", dom.cell_multi(c)))
            })
        })
        .collect::<Result<_>>()?;
    let first = cells[0];
    if cells.iter().all(|a| *a == first) {
        LinearizedOperator::constant(dom, first)
    } else {
        LinearizedOperator::from_cells(dom, cells)
    }
}

/// Green kernel with pole at node `pole`: `K G = e_pole`, i.e. the discrete
/// `−div(A∇G) = δ_pole` with a unit-mass node delta and zero boundary values.
pub fn green_kernel<const D: usize>(op: &LinearizedOperator<D>, pole: usize, tol: f64) -> Result<GridField<D>> {
    let dom = op.domain();
    if pole >= dom.num_nodes() || dom.is_boundary(pole) {
        return Err(WntError::InvalidInput(format!("Green pole {pole} is not an interior node")));
    }
    let mut b = vec![0.0; dom.num_nodes()];
    b[pole] = 1.0;
    let mut g = vec![0.0; dom.num_nodes()];
    op.solve(&b, &mut g, tol, 20 * dom.num_nodes())?;
    GridField::from_values(*dom, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::{AnisotropyField, ScalarProfile};

    #[test]
    fn euclidean_linearization_is_identity() {
        let dom = GridDomain::<2>::unit(8).unwrap();
        let u = GridField::from_fn(dom, |p| p[0] * p[1]);
        let op = linearize(&WntStructure::euclidean(), &u).unwrap();
        assert!(op.is_constant());
        assert_eq!(op.m(), 1.0);
        assert_eq!(op.l(), 1.0);
    }

    #[test]
    fn riemannian_linearization_is_inverse_metric() {
        let dom = GridDomain::<2>::unit(8).unwrap();
        let an = AnisotropyField::new(linalg::diag(&[2.0, 1.0]), linalg::identity(), ScalarProfile::constant(0.0), 1.0, None)
            .unwrap();
        let op = linearize(&WntStructure::new(an), &GridField::from_fn(dom, |p| p[0])).unwrap();
        let a = op.cell_matrix(5);
        assert!((a[0][0] - 0.5).abs() < 1e-15 && (a[1][1] - 1.0).abs() < 1e-15 && a[0][1] == 0.0);
    }

    #[test]
    fn ramp_linearization_matches_dual_hessian() {
        let dom = GridDomain::<2>::unit(8).unwrap();
        let s = WntStructure::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
        let u = GridField::from_fn(dom, |p| 2.5 * p[0]);
        let op = linearize(&s, &u).unwrap();
        let expect = s.dual_hessian(&[0.5, 0.5], &[2.5, 0.0]).unwrap();
        for c in 0..dom.num_cells() {
            let a = op.cell_matrix(c);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a[i][j] - expect[i][j]).abs() < 1e-9);
                }
            }
        }
        assert!((op.m() - 0.25).abs() < 1e-8 && (op.l() - 0.4).abs() < 1e-8);
    }

    #[test]
    fn non_spd_cell_is_named() {
        let dom = GridDomain::<2>::unit(8).unwrap();
        let mut cells = vec![linalg::identity::<2>(); dom.num_cells()];
        cells[3] = linalg::diag(&[1.0, -1.0]);
        let err = LinearizedOperator::from_cells(&dom, cells).unwrap_err();
        assert!(matches!(err, WntError::DegenerateFiber(ref m) if m.contains("cell 3")), "{err}");
    }

    #[test]
    fn laplacian_matches_five_point_stencil() {
        let dom = GridDomain::<2>::unit(8).unwrap();
        let op = LinearizedOperator::laplacian(&dom);
        let u = GridField::from_fn(dom, |p| (p[0] * (1.0 - p[0])) * (p[1] * (1.0 - p[1])));
        let mut out = vec![0.0; dom.num_nodes()];
        op.apply(u.values(), &mut out);
        let h = 1.0 / 8.0;
        let i = dom.node_index(&[3, 4]);
        let v = u.values();
        let five = (4.0 * v[i] - v[i + 1] - v[i - 1] - v[i + 9] - v[i - 9]) / (h * h);
        assert!((out[i] / (h * h) - five).abs() < 1e-10);
    }

    #[test]
    fn green_kernel_is_nonnegative() {
        let dom = GridDomain::<2>::unit(16).unwrap();
        let op = LinearizedOperator::laplacian(&dom);
        let g = green_kernel(&op, dom.node_index(&[8, 8]), 1e-12).unwrap();
        assert!(g.values().iter().all(|&v| v >= -1e-12));
        assert!(green_kernel(&op, 0, 1e-10).is_err());
    }
}
