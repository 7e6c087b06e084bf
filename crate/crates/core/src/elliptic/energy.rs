use rayon::prelude::*;

use crate::error::{Result, WntError};
use crate::finsler::WntStructure;
use crate::grid::{GridDomain, GridField};
use crate::linalg::{self, Vector};

use super::stencil::Stencil;

/// `(H(x, ξ), ∂_ξH(x, ξ))` for a fiber with double-phase weight `a`.
#[inline]
pub(crate) fn cell_hamiltonian<const D: usize>(s: &WntStructure<D>, a: f64, xi: &Vector<D>) -> Result<(f64, Vector<D>)> {
    if a == 0.0 {
        let y = linalg::matvec(s.anisotropy().g_inv(), xi);
        Ok((0.5 * linalg::dot(&y, xi), y))
    } else {
        let pair = s.invert_with_weight(a, xi)?;
        Ok((pair.hamiltonian, pair.y))
    }
}

/// Double-phase weight `a` at every cell centre.
pub(crate) fn cell_weights<const D: usize>(s: &WntStructure<D>, domain: &GridDomain<D>) -> Result<Vec<f64>> {
    (0..domain.num_cells())
        .map(|c| s.anisotropy().a_at(&domain.cell_center(c)))
        .collect()
}

/// `Σ_c vol·H(x_c, D_c u)` and, if requested, its gradient with respect to
/// every node value (boundary rows included).
pub(crate) fn dirichlet_part<const D: usize>(
    s: &WntStructure<D>,
    stencil: &Stencil<D>,
    weights: &[f64],
    u: &[f64],
    grad: Option<&mut [f64]>,
) -> Result<f64> {
    let vol = stencil.domain.cell_volume();
    let per_cell: Vec<(f64, Vector<D>)> = stencil
        .cell_base
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&b, &a)| cell_hamiltonian(s, a, &stencil.gradient(u, b)))
        .collect::<Result<_>>()?;
    let energy: f64 = per_cell.iter().map(|(h, _)| h).sum::<f64>() * vol;
    if let Some(grad) = grad {
        let mut flux = vec![[0.0; D]; u.len()];
        for (&b, (_, y)) in stencil.cell_base.iter().zip(&per_cell) {
            flux[b] = linalg::scale(y, vol);
        }
        stencil.adjoint(&flux, grad, false);
    }
    Ok(energy)
}

/// Discrete energy `Σ_c vol·H(x_c, D_c u) − Σ_i w_i f_i u_i` with forward-difference
/// cell gradients and trapezoid node weights `w_i`.
pub fn energy<const D: usize>(s: &WntStructure<D>, u: &GridField<D>, f: &GridField<D>) -> Result<f64> {
    u.domain().check_compatible(f.domain())?;
    if u.values().iter().chain(f.values()).any(|v| !v.is_finite()) {
        return Err(WntError::InvalidInput("non-finite field values".into()));
    }
    let stencil = Stencil::new(u.domain());
    let weights = cell_weights(s, u.domain())?;
    let e = dirichlet_part(s, &stencil, &weights, u.values(), None)?;
    let dom = u.domain();
    let load: f64 = (0..dom.num_nodes())
        .map(|i| dom.node_weight(i) * f.values()[i] * u.values()[i])
        .sum();
    Ok(e - load)
}

/// Second-order gradient at every node: central differences inside, one-sided
/// second-order differences on the boundary faces.
pub fn central_gradient<const D: usize>(u: &GridField<D>) -> Vec<Vector<D>> {
    let dom = u.domain();
    let v = u.values();
    (0..dom.num_nodes())
        .into_par_iter()
        .map(|i| {
            let m = dom.node_multi(i);
            let mut g = [0.0; D];
            for k in 0..D {
                let s = dom.stride(k);
                let h = dom.spacing()[k];
                let n = dom.nodes_per_axis()[k];
                g[k] = if m[k] == 0 {
                    (-3.0 * v[i] + 4.0 * v[i + s] - v[i + 2 * s]) / (2.0 * h)
                } else if m[k] == n - 1 {
                    (3.0 * v[i] - 4.0 * v[i - s] + v[i - 2 * s]) / (2.0 * h)
                } else {
                    (v[i + s] - v[i - s]) / (2.0 * h)
                };
            }
            g
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::AnisotropyField;

    #[test]
    fn zero_field_has_zero_energy() {
        let dom = GridDomain::<2>::unit(16).unwrap();
        let z = GridField::zeros(dom);
        let s = WntStructure::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
        assert_eq!(energy(&s, &z, &z).unwrap(), 0.0);
    }

    #[test]
    fn euclidean_ramp_energy() {
        let dom = GridDomain::<2>::unit(32).unwrap();
        let u = GridField::from_fn(dom, |p| p[0]);
        let f = GridField::zeros(dom);
        let e = energy(&WntStructure::euclidean(), &u, &f).unwrap();
        assert!((e - 0.5).abs() < 1e-12, "{e}");
    }

    #[test]
    fn double_phase_ramp_energy_is_the_dual_value() {
        // H(1,0) = max_t (t − t²/2 − t³/2), attained at t = (√7 − 1)/3
        let t = (7f64.sqrt() - 1.0) / 3.0;
        let exact = t - 0.5 * t * t - 0.5 * t * t * t;
        let dom = GridDomain::<2>::unit(16).unwrap();
        let u = GridField::from_fn(dom, |p| p[0]);
        let f = GridField::zeros(dom);
        let s = WntStructure::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
        let e = energy(&s, &u, &f).unwrap();
        assert!((e - exact).abs() < 1e-10, "{e} vs {exact}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let dom = GridDomain::<2>::unit(8).unwrap();
        let s = WntStructure::new(AnisotropyField::isotropic_double_phase(0.7, 0.5).unwrap());
        let st = Stencil::new(&dom);
        let w = cell_weights(&s, &dom).unwrap();
        let u: Vec<f64> = (0..dom.num_nodes()).map(|i| ((i * 37 % 11) as f64 * 0.3).sin()).collect();
        let mut g = vec![0.0; u.len()];
        dirichlet_part(&s, &st, &w, &u, Some(&mut g)).unwrap();
        for &i in &[10usize, 40, 55] {
            let h = 1e-6;
            let mut up = u.clone();
            up[i] += h;
            let mut dn = u.clone();
            dn[i] -= h;
            let fd = (dirichlet_part(&s, &st, &w, &up, None).unwrap() - dirichlet_part(&s, &st, &w, &dn, None).unwrap())
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()), "{fd} vs {}", g[i]);
        }
    }

    #[test]
    fn central_gradient_is_exact_on_quadratics() {
        let dom = GridDomain::<2>::unit(10).unwrap();
        let u = GridField::from_fn(dom, |p| p[0] * p[0] + 3.0 * p[1]);
        let g = central_gradient(&u);
        for (i, gi) in g.iter().enumerate() {
            let p = dom.node_position(i);
            assert!((gi[0] - 2.0 * p[0]).abs() < 1e-12 && (gi[1] - 3.0).abs() < 1e-12);
        }
    }
}
