use rayon::prelude::*;

use crate::grid::GridDomain;
use crate::linalg::Vector;

/// Forward-difference cell gradients and their adjoint on a box grid.
///
/// Every cell carries one gradient `D_c u`, built from its lowest corner and
/// the `D` neighbours along the axes. Fluxes are stored per base node (zero
/// for nodes that are not the base of a cell) so that the adjoint can be
/// gathered node by node.
#[derive(Debug, Clone)]
pub(crate) struct Stencil<const D: usize> {
    pub domain: GridDomain<D>,
    pub strides: [usize; D],
    pub inv_h: Vector<D>,
    /// Base node of every cell, in cell order.
    pub cell_base: Vec<usize>,
    pub boundary: Vec<bool>,
}

impl<const D: usize> Stencil<D> {
    pub fn new(domain: &GridDomain<D>) -> Self {
        let mut strides = [0; D];
        let mut inv_h = [0.0; D];
        for k in 0..D {
            strides[k] = domain.stride(k);
            inv_h[k] = 1.0 / domain.spacing()[k];
        }
        let cell_base = (0..domain.num_cells()).map(|c| domain.cell_base_node(c)).collect();
        let boundary = (0..domain.num_nodes()).map(|i| domain.is_boundary(i)).collect();
        Self {
            domain: *domain,
            strides,
            inv_h,
            cell_base,
            boundary,
        }
    }

    #[inline]
    pub fn gradient(&self, u: &[f64], base: usize) -> Vector<D> {
        let mut g = [0.0; D];
        for k in 0..D {
            g[k] = (u[base + self.strides[k]] - u[base]) * self.inv_h[k];
        }
        g
    }

    /// `out = Σ_c D_cᵀ F_c` where `flux[base(c)] = F_c`. Boundary rows are zeroed
    /// when `mask_boundary` is set.
    pub fn adjoint(&self, flux: &[Vector<D>], out: &mut [f64], mask_boundary: bool) {
        let dom = &self.domain;
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            if mask_boundary && self.boundary[i] {
                *o = 0.0;
                return;
            }
            let m = dom.node_multi(i);
            let mut acc = 0.0;
            for k in 0..D {
                acc -= flux[i][k] * self.inv_h[k];
                if m[k] > 0 {
                    acc += flux[i - self.strides[k]][k] * self.inv_h[k];
                }
            }
            *o = acc;
        });
    }
}
