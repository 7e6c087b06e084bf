use crate::error::{Result, WntError};
use crate::linalg::{self, Vector};

use super::WntStructure;

/// Brute-force Fenchel conjugate `sup_y {⟨ξ,y⟩ − Φ_x(y)}` over a uniform grid
/// of `samples` points per axis restricted to the ball of radius `radius`.
///
/// Test oracle only: it is independent of the Newton inversion and returns a
/// lower bound on `H(x, ξ)`. A maximizer within 1.5 grid spacings of the ball
/// boundary means the true supremum may lie outside, which is reported as
/// [`WntError::RadiusTooSmall`].
pub fn hamiltonian_oracle<const D: usize>(
    s: &WntStructure<D>,
    x: &Vector<D>,
    xi: &Vector<D>,
    radius: f64,
    samples: usize,
) -> Result<f64> {
    if samples < 3 || !(radius > 0.0) {
        return Err(WntError::InvalidInput(format!(
            "oracle needs samples >= 3 and radius > 0 (got {samples}, {radius})"
        )));
    }
    if !linalg::is_finite(xi) {
        return Err(WntError::InvalidInput("xi has non-finite components".into()));
    }
    let a = s.anisotropy().a_at(x)?;
    let spacing = 2.0 * radius / (samples - 1) as f64;
    let total = samples.pow(D as u32);
    let mut best = f64::NEG_INFINITY;
    let mut best_y = [0.0; D];
    let mut y = [0.0; D];
    for flat in 0..total {
        let mut rem = flat;
        for c in y.iter_mut() {
            let k = rem % samples;
            rem /= samples;
            *c = -radius + k as f64 * spacing;
        }
        if linalg::norm(&y) > radius {
            continue;
        }
        let v = linalg::dot(xi, &y) - s.phi_with_weight(a, &y);
        if v > best {
            best = v;
            best_y = y;
        }
    }
    if linalg::norm(&best_y) > radius - 1.5 * spacing {
        return Err(WntError::RadiusTooSmall { radius });
    }
    Ok(best)
}

/// Spacing of the oracle grid for the given parameters.
pub fn oracle_spacing(radius: f64, samples: usize) -> f64 {
    2.0 * radius / (samples.max(2) - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::AnisotropyField;

    #[test]
    fn zero_covector_gives_zero() {
        let s = WntStructure::<2>::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
        assert_eq!(hamiltonian_oracle(&s, &[0.0, 0.0], &[0.0, 0.0], 1.0, 21).unwrap(), 0.0);
    }

    #[test]
    fn double_phase_example() {
        let s = WntStructure::<2>::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
        let h = hamiltonian_oracle(&s, &[0.0, 0.0], &[2.5, 0.0], 3.0, 401).unwrap();
        assert!((h - 1.5).abs() <= 5e-3, "{h}");
        assert!(h <= 1.5 + 1e-12);
    }

    #[test]
    fn quadratic_dual() {
        let s = WntStructure::<2>::euclidean();
        let h = hamiltonian_oracle(&s, &[0.0, 0.0], &[1.0, 0.0], 3.0, 401).unwrap();
        assert!((h - 0.5).abs() <= 5e-3);
    }

    #[test]
    fn small_radius_is_detected() {
        let s = WntStructure::<2>::euclidean();
        let err = hamiltonian_oracle(&s, &[0.0, 0.0], &[3.0, 0.0], 1.0, 101).unwrap_err();
        assert_eq!(err, WntError::RadiusTooSmall { radius: 1.0 });
    }
}
