use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::elliptic::{green_kernel, LinearizedOperator};
use crate::error::Result;
use crate::grid::{GridDomain, GridField};
use crate::linalg::Vector;

/// Lazily computed Green kernels of one operator, keyed by pole node.
pub struct GreenTable {
    op: LinearizedOperator<2>,
    tol: f64,
    cache: Mutex<HashMap<usize, Arc<GridField<2>>>>,
}

impl GreenTable {
    pub fn new(op: LinearizedOperator<2>, tol: f64) -> Self {
        Self {
            op,
            tol,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn operator(&self) -> &LinearizedOperator<2> {
        &self.op
    }

    pub fn domain(&self) -> &GridDomain<2> {
        self.op.domain()
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("green cache poisoned").len()
    }

    /// Kernel with pole at `node`; identically zero for boundary poles.
    pub fn kernel(&self, node: usize) -> Result<Arc<GridField<2>>> {
        if let Some(k) = self.cache.lock().expect("green cache poisoned").get(&node) {
            return Ok(Arc::clone(k));
        }
        let g = if self.domain().is_boundary(node) {
            GridField::zeros(*self.domain())
        } else {
            green_kernel(&self.op, node, self.tol)?
        };
        let mut cache = self.cache.lock().expect("green cache poisoned");
        Ok(Arc::clone(cache.entry(node).or_insert_with(|| Arc::new(g))))
    }

    /// Computes the kernels of all listed poles concurrently.
    pub fn precompute(&self, nodes: &[usize]) -> Result<()> {
        nodes.par_iter().try_for_each(|&n| self.kernel(n).map(|_| ()))
    }

    /// Bilinear evaluation in both arguments, symmetrized:
    /// `½[Σ_n w_n(y) G_n(x) + Σ_n w_n(x) G_n(y)]`.
    pub fn eval(&self, x: &Vector<2>, y: &Vector<2>) -> Result<f64> {
        Ok(0.5 * (self.eval_one_sided(x, y)? + self.eval_one_sided(y, x)?))
    }

    fn eval_one_sided(&self, x: &Vector<2>, y: &Vector<2>) -> Result<f64> {
        let mut acc = 0.0;
        for (n, w) in self.domain().interpolation_stencil(y)? {
            if w != 0.0 {
                acc += w * self.kernel(n)?.interpolate(x)?;
            }
        }
        Ok(acc)
    }
}
