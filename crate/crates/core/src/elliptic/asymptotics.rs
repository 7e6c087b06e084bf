use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Result, WntError};
use crate::finsler::least_squares;
use crate::grid::GridField;
use crate::linalg::{self, Matrix, Vector};

use super::operator::{green_kernel, LinearizedOperator};

/// `G(x)·4π·√det A·d_A(x − y)` over an annulus around the pole, where
/// `d_A(r) = √⟨A⁻¹r, r⟩` uses the matrix frozen at the pole.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CoulombCheck {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Least-squares fit `G ≈ c/(4π√det A·d_A) + b` over the annulus.
    pub fit_c: f64,
    pub fit_b: f64,
}

impl CoulombCheck {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.nodes > 0 && self.min_ratio >= lo && self.max_ratio <= hi
    }
}

/// `G(x) + log d_A(x − y)/(2π√det A)` over an annulus around the pole.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LogDefectCheck {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// `(max − min)/|mean|`.
    pub variation: f64,
}

fn pole_matrix<const D: usize>(op: &LinearizedOperator<D>, pole: usize) -> Matrix<D> {
    let dom = op.domain();
    let mut m = dom.node_multi(pole);
    for k in 0..D {
        m[k] = m[k].min(dom.resolution()[k] - 1);
    }
    let mut cell = 0;
    let mut stride = 1;
    for k in 0..D {
        cell += m[k] * stride;
        stride *= dom.resolution()[k];
    }
    *op.cell_matrix(cell)
}

/// Nodes in the annulus `r_min ≤ d_A ≤ r_max` with their intrinsic distance.
fn annulus<const D: usize>(
    op: &LinearizedOperator<D>,
    pole: usize,
    r_min: f64,
    r_max: f64,
) -> Result<(f64, Vec<(usize, f64)>)> {
    let a = pole_matrix(op, pole);
    let a_inv = linalg::inverse(&a).ok_or_else(|| WntError::DegenerateFiber("singular pole matrix".into()))?;
    let det = linalg::sym_eigenvalues(&a).iter().product::<f64>();
    let dom = op.domain();
    let y = dom.node_position(pole);
    let nodes = (0..dom.num_nodes())
        .filter(|&i| !dom.is_boundary(i))
        .filter_map(|i| {
            let r: Vector<D> = linalg::sub(&dom.node_position(i), &y);
            let d = linalg::quad(&a_inv, &r).sqrt();
            (d >= r_min - 1e-12 && d <= r_max + 1e-12).then_some((i, d))
        })
        .collect();
    Ok((det.sqrt(), nodes))
}

pub fn check_coulomb(
    op: &LinearizedOperator<3>,
    green: &GridField<3>,
    pole: usize,
    r_min: f64,
    r_max: f64,
) -> Result<CoulombCheck> {
    op.domain().check_compatible(green.domain())?;
    let (sdet, nodes) = annulus(op, pole, r_min, r_max)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut xs = Vec::with_capacity(nodes.len());
    let mut ys = Vec::with_capacity(nodes.len());
    for &(i, d) in &nodes {
        let g = green.values()[i];
        let ratio = g * 4.0 * PI * sdet * d;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        xs.push(1.0 / (4.0 * PI * sdet * d));
        ys.push(g);
    }
    let (fit_c, fit_b) = if xs.len() >= 2 { least_squares(&xs, &ys) } else { (f64::NAN, f64::NAN) };
    Ok(CoulombCheck {
        r_min,
        r_max,
        nodes: nodes.len(),
        min_ratio: lo,
        max_ratio: hi,
        fit_c,
        fit_b,
    })
}

pub fn check_log_defect(
    op: &LinearizedOperator<2>,
    green: &GridField<2>,
    pole: usize,
    r_min: f64,
    r_max: f64,
) -> Result<LogDefectCheck> {
    op.domain().check_compatible(green.domain())?;
    let (sdet, nodes) = annulus(op, pole, r_min, r_max)?;
    let defects: Vec<f64> = nodes
        .iter()
        .map(|&(i, d)| green.values()[i] + d.ln() / (2.0 * PI * sdet))
        .collect();
    let n = defects.len();
    let mean = defects.iter().sum::<f64>() / n.max(1) as f64;
    let min = defects.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = defects.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(LogDefectCheck {
        r_min,
        r_max,
        nodes: n,
        mean,
        min,
        max,
        variation: (max - min) / mean.abs(),
    })
}

/// Largest `|G_y(x) − G_x(y)|` over the given node pairs.
pub fn reciprocity<const D: usize>(op: &LinearizedOperator<D>, pairs: &[(usize, usize)], tol: f64) -> Result<f64> {
    let mut cache: HashMap<usize, GridField<D>> = HashMap::new();
    let mut worst: f64 = 0.0;
    for &(x, y) in pairs {
        for p in [x, y] {
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(p) {
                e.insert(green_kernel(op, p, tol)?);
            }
        }
        let gyx = cache[&y].values()[x];
        let gxy = cache[&x].values()[y];
        worst = worst.max((gyx - gxy).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;

    #[test]
    fn two_dimensional_log_defect_is_flat() {
        let dom = GridDomain::<2>::unit(64).unwrap();
        let op = LinearizedOperator::laplacian(&dom);
        let pole = dom.node_index(&[32, 32]);
        let g = green_kernel(&op, pole, 1e-12).unwrap();
        let chk = check_log_defect(&op, &g, pole, 4.0 / 64.0, 1.0 / 8.0).unwrap();
        assert!(chk.nodes > 20);
        assert!(chk.variation < 0.2, "{chk:?}");
    }

    #[test]
    fn reciprocity_of_anisotropic_operator() {
        let dom = GridDomain::<2>::unit(16).unwrap();
        let a = crate::finsler::rotated_metric_2d(0.4, [1.0, 3.0]);
        let op = LinearizedOperator::constant(&dom, a).unwrap();
        let pairs = [(dom.node_index(&[3, 4]), dom.node_index(&[11, 9])), (dom.node_index(&[7, 2]), dom.node_index(&[5, 13]))];
        assert!(reciprocity(&op, &pairs, 1e-12).unwrap() < 1e-9);
    }
}
