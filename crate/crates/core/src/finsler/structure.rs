use crate::error::{Result, WntError};
use crate::linalg::{self, Matrix, Vector};

use super::AnisotropyField;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 60;

/// Fiberwise double-phase Lagrangian `Φ_x(y) = ½F²(x, y)` together with its
/// Legendre map and the dual Hamiltonian `H(x, ·) = Φ_x^*`.
///
/// The growth exponent is tied to the coefficient field: `p = 2 + η`,
/// `p' = p / (p - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WntStructure<const D: usize> {
    anisotropy: AnisotropyField<D>,
    p: f64,
    p_dual: f64,
}

/// Result of inverting the Legendre map at a covector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendrePair<const D: usize> {
    /// `y = ∂_ξH(x, ξ)`
    pub y: Vector<D>,
    /// `H(x, ξ) = ⟨ξ, y⟩ − Φ_x(y)`
    pub hamiltonian: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl<const D: usize> WntStructure<D> {
    pub fn new(anisotropy: AnisotropyField<D>) -> Self {
        // without the double-phase weight only the quadratic part remains
        let p = if anisotropy.profile().is_identically_zero() {
            2.0
        } else {
            2.0 + anisotropy.eta()
        };
        let p_dual = p / (p - 1.0);
        Self {
            anisotropy,
            p,
            p_dual,
        }
    }

    pub fn euclidean() -> Self {
        Self::new(AnisotropyField::euclidean())
    }

    pub fn anisotropy(&self) -> &AnisotropyField<D> {
        &self.anisotropy
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_dual(&self) -> f64 {
        self.p_dual
    }

    fn check_finite(name: &str, v: &Vector<D>) -> Result<()> {
        if linalg::is_finite(v) {
            Ok(())
        } else {
            Err(WntError::InvalidInput(format!("{name} has non-finite components: {v:?}")))
        }
    }

    /// `Φ_x(y) = ½(⟨g y, y⟩ + a(x)⟨h y, y⟩^{1+η/2})`
    pub fn phi(&self, x: &Vector<D>, y: &Vector<D>) -> Result<f64> {
        Self::check_finite("x", x)?;
        Self::check_finite("y", y)?;
        let a = self.anisotropy.a_at(x)?;
        Ok(self.phi_with_weight(a, y))
    }

    /// `F_B(x, y) = √(2Φ_x(y))`
    pub fn f_norm(&self, x: &Vector<D>, y: &Vector<D>) -> Result<f64> {
        Ok((2.0 * self.phi(x, y)?).sqrt())
    }

    pub(crate) fn phi_with_weight(&self, a: f64, y: &Vector<D>) -> f64 {
        let gq = linalg::quad(self.anisotropy.g(), y);
        if a == 0.0 {
            return 0.5 * gq;
        }
        let hq = linalg::quad(self.anisotropy.h(), y).max(0.0);
        0.5 * (gq + a * hq.powf(1.0 + 0.5 * self.anisotropy.eta()))
    }

    /// Legendre map `∂_yΦ_x(y) = g y + (1+η/2) a ⟨h y, y⟩^{η/2} h y`.
    pub fn legendre(&self, x: &Vector<D>, y: &Vector<D>) -> Result<Vector<D>> {
        Self::check_finite("x", x)?;
        Self::check_finite("y", y)?;
        let a = self.anisotropy.a_at(x)?;
        Ok(self.legendre_with_weight(a, y))
    }

    pub(crate) fn legendre_with_weight(&self, a: f64, y: &Vector<D>) -> Vector<D> {
        let mut out = linalg::matvec(self.anisotropy.g(), y);
        if a == 0.0 {
            return out;
        }
        let eta = self.anisotropy.eta();
        let hy = linalg::matvec(self.anisotropy.h(), y);
        let hq = linalg::dot(&hy, y).max(0.0);
        if hq > 0.0 {
            let c = (1.0 + 0.5 * eta) * a * hq.powf(0.5 * eta);
            linalg::axpy(&mut out, c, &hy);
        }
        out
    }

    /// Fiber Hessian `D²_{yy}Φ_x(y)`. At `y = 0` the continuous limit `g` is returned.
    pub fn primal_hessian(&self, x: &Vector<D>, y: &Vector<D>) -> Result<Matrix<D>> {
        Self::check_finite("x", x)?;
        Self::check_finite("y", y)?;
        let a = self.anisotropy.a_at(x)?;
        Ok(self.primal_hessian_with_weight(a, y))
    }

    pub(crate) fn primal_hessian_with_weight(&self, a: f64, y: &Vector<D>) -> Matrix<D> {
        let mut m = *self.anisotropy.g();
        if a == 0.0 {
            return m;
        }
        let eta = self.anisotropy.eta();
        let hy = linalg::matvec(self.anisotropy.h(), y);
        let hq = linalg::dot(&hy, y).max(0.0);
        if hq > 0.0 {
            let c = (1.0 + 0.5 * eta) * a;
            linalg::mat_add_scaled(&mut m, c * hq.powf(0.5 * eta), self.anisotropy.h());
            // d/dy ⟨hy,y⟩^{η/2} = η ⟨hy,y⟩^{η/2-1} h y
            linalg::mat_add_scaled(&mut m, c * eta * hq.powf(0.5 * eta - 1.0), &linalg::outer(&hy, &hy));
        }
        m
    }

    /// Damped Newton inversion of `∂_yΦ_x(y) = ξ`, started at `g⁻¹ξ`.
    pub(crate) fn invert_with_weight(&self, a: f64, xi: &Vector<D>) -> Result<LegendrePair<D>> {
        let mut y = linalg::matvec(self.anisotropy.g_inv(), xi);
        let tol = NEWTON_TOL * (1.0 + linalg::norm(xi));
        let residual_of = |y: &Vector<D>| linalg::sub(&self.legendre_with_weight(a, y), xi);
        let objective = |y: &Vector<D>| self.phi_with_weight(a, y) - linalg::dot(xi, y);

        let mut r = residual_of(&y);
        let mut rnorm = linalg::norm(&r);
        let mut iterations = 0;
        let mut converged_at: Option<usize> = None;
        while iterations < NEWTON_MAX_ITER {
            if rnorm <= tol && converged_at.is_none() {
                converged_at = Some(iterations);
            }
            // after reaching tolerance, keep polishing while it still helps (at most two steps)
            if let Some(k) = converged_at {
                if iterations >= k + 2 || rnorm == 0.0 {
                    break;
                }
            }
            let hess = self.primal_hessian_with_weight(a, &y);
            let step = match linalg::solve(&hess, &r) {
                Some(s) => s,
                None => {
                    return Err(WntError::DegenerateFiber(format!(
                        "singular fiber Hessian during Legendre inversion at y = {y:?}"
                    )))
                }
            };
            let f0 = objective(&y);
            let slope = -linalg::dot(&r, &step);
            let mut t = 1.0;
            let mut y_new = linalg::sub(&y, &step);
            if converged_at.is_none() {
                // Armijo backtracking on the strictly convex objective Φ − ⟨ξ,·⟩
                let mut tries = 0;
                while objective(&y_new) > f0 + 1e-4 * t * slope + 1e-15 * f0.abs() && tries < 40 {
                    t *= 0.5;
                    y_new = linalg::sub(&y, &linalg::scale(&step, t));
                    tries += 1;
                }
            }
            let r_new = residual_of(&y_new);
            let rn_new = linalg::norm(&r_new);
            iterations += 1;
            if converged_at.is_some() && rn_new >= rnorm {
                break;
            }
            y = y_new;
            r = r_new;
            rnorm = rn_new;
        }
        if rnorm > tol {
            return Err(WntError::InversionFailed {
                iterations,
                residual: rnorm,
            });
        }
        let hamiltonian = linalg::dot(xi, &y) - self.phi_with_weight(a, &y);
        Ok(LegendrePair {
            y,
            hamiltonian: hamiltonian.max(0.0),
            iterations,
            residual: rnorm,
        })
    }

    /// Inverts the Legendre map at `ξ`, returning both `∂_ξH` and `H`.
    pub fn invert_legendre(&self, x: &Vector<D>, xi: &Vector<D>) -> Result<LegendrePair<D>> {
        Self::check_finite("x", x)?;
        Self::check_finite("xi", xi)?;
        let a = self.anisotropy.a_at(x)?;
        self.invert_with_weight(a, xi)
    }

    /// `H(x, ξ) = ⟨ξ, y*⟩ − Φ_x(y*)` with `∂_yΦ_x(y*) = ξ`.
    pub fn hamiltonian(&self, x: &Vector<D>, xi: &Vector<D>) -> Result<f64> {
        Ok(self.invert_legendre(x, xi)?.hamiltonian)
    }

    /// `∂_ξH(x, ξ) = (∂_yΦ_x)^{-1}(ξ)`
    pub fn dual_gradient(&self, x: &Vector<D>, xi: &Vector<D>) -> Result<Vector<D>> {
        Ok(self.invert_legendre(x, xi)?.y)
    }

    /// `D²_{ξξ}H(x, ξ) = (D²_{yy}Φ_x(y))^{-1}` at `y = ∂_ξH(x, ξ)`.
    pub fn dual_hessian(&self, x: &Vector<D>, xi: &Vector<D>) -> Result<Matrix<D>> {
        let pair = self.invert_legendre(x, xi)?;
        let a = self.anisotropy.a_at(x)?;
        self.dual_hessian_at_primal(a, &pair.y)
    }

    pub(crate) fn dual_hessian_at_primal(&self, a: f64, y: &Vector<D>) -> Result<Matrix<D>> {
        let hess = self.primal_hessian_with_weight(a, y);
        linalg::inverse(&hess).ok_or_else(|| {
            WntError::DegenerateFiber(format!("singular primal Hessian at y = {y:?}"))
        })
    }
}
