use serde::{Deserialize, Serialize};

use crate::error::{Result, WntError};
use crate::linalg::{self, Matrix, Vector};

/// Spatial profile of the double-phase weight `a(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarProfile {
    Constant {
        value: f64,
    },
    /// `a(x) = base + ⟨gradient, x⟩`
    Affine {
        base: f64,
        gradient: Vec<f64>,
    },
    /// `a(x) = mean + amplitude · sin(⟨wavevector, x⟩ + phase)`
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        wavevector: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
}

impl ScalarProfile {
    pub fn constant(value: f64) -> Self {
        ScalarProfile::Constant { value }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarProfile::Constant { value } => *value,
            ScalarProfile::Affine { base, gradient } => {
                base + gradient.iter().zip(x).map(|(g, xi)| g * xi).sum::<f64>()
            }
            ScalarProfile::Sinusoidal {
                mean,
                amplitude,
                wavevector,
                phase,
            } => {
                let arg: f64 = wavevector.iter().zip(x).map(|(k, xi)| k * xi).sum();
                mean + amplitude * (arg + phase).sin()
            }
        }
    }

    /// Bounds implied by the profile alone, when they exist independently of the domain.
    pub fn intrinsic_bounds(&self) -> Option<(f64, f64)> {
        match self {
            ScalarProfile::Constant { value } => Some((*value, *value)),
            ScalarProfile::Sinusoidal {
                mean, amplitude, ..
            } => Some((mean - amplitude.abs(), mean + amplitude.abs())),
            ScalarProfile::Affine { gradient, base } => {
                if gradient.iter().all(|g| *g == 0.0) {
                    Some((*base, *base))
                } else {
                    None
                }
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.intrinsic_bounds() == Some((0.0, 0.0))
    }
}

/// Coefficients `(g, h, a, η)` of the double-phase structure
/// `F² = ⟨g y, y⟩ + a(x) ⟨h y, y⟩^{1+η/2}`.
///
/// The metrics `g` and `h` are constant over the domain; only `a` varies.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropyField<const D: usize> {
    g: Matrix<D>,
    h: Matrix<D>,
    g_inv: Matrix<D>,
    h_inv: Matrix<D>,
    a: ScalarProfile,
    a_bounds: (f64, f64),
    eta: f64,
}

impl<const D: usize> AnisotropyField<D> {
    /// Builds a validated field. `a_bounds` are the declared `[a₁, a₂]`; when
    /// `None` they are taken from the profile (affine profiles must declare them).
    pub fn new(
        g: Matrix<D>,
        h: Matrix<D>,
        a: ScalarProfile,
        eta: f64,
        a_bounds: Option<(f64, f64)>,
    ) -> Result<Self> {
        check_spd("g", &g)?;
        check_spd("h", &h)?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(WntError::InvalidInput(format!("eta must lie in (0, 1], got {eta}")));
        }
        let bounds = match (a_bounds, a.intrinsic_bounds()) {
            (Some(b), Some(intrinsic)) => {
                if intrinsic.0 < b.0 - 1e-12 || intrinsic.1 > b.1 + 1e-12 {
                    return Err(WntError::InvalidInput(format!(
                        "a profile range [{}, {}] exceeds declared bounds [{}, {}]",
                        intrinsic.0, intrinsic.1, b.0, b.1
                    )));
                }
                b
            }
            (Some(b), None) => b,
            (None, Some(b)) => b,
            (None, None) => {
                return Err(WntError::InvalidInput(
                    "affine a(x) requires declared bounds [a1, a2]".into(),
                ))
            }
        };
        if !(bounds.0 >= 0.0 && bounds.0 <= bounds.1 && bounds.1.is_finite()) {
            return Err(WntError::InvalidInput(format!(
                "a bounds must satisfy 0 <= a1 <= a2 < inf, got [{}, {}]",
                bounds.0, bounds.1
            )));
        }
        let g_inv = linalg::inverse(&g)
            .ok_or_else(|| WntError::InvalidInput("g is singular".into()))?;
        let h_inv = linalg::inverse(&h)
            .ok_or_else(|| WntError::InvalidInput("h is singular".into()))?;
        Ok(Self {
            g,
            h,
            g_inv,
            h_inv,
            a,
            a_bounds: bounds,
            eta,
        })
    }

    /// `g = h = I`, `a ≡ 0`: the Euclidean (Riemannian) limit.
    pub fn euclidean() -> Self {
        Self::new(
            linalg::identity(),
            linalg::identity(),
            ScalarProfile::constant(0.0),
            1.0,
            None,
        )
        .expect("identity metrics are valid")
    }

    /// `g = h = I` with constant weight `a` and exponent `eta`.
    pub fn isotropic_double_phase(a: f64, eta: f64) -> Result<Self> {
        Self::new(
            linalg::identity(),
            linalg::identity(),
            ScalarProfile::constant(a),
            eta,
            None,
        )
    }

    pub fn g(&self) -> &Matrix<D> {
        &self.g
    }

    pub fn h(&self) -> &Matrix<D> {
        &self.h
    }

    pub fn g_inv(&self) -> &Matrix<D> {
        &self.g_inv
    }

    pub fn h_inv(&self) -> &Matrix<D> {
        &self.h_inv
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn profile(&self) -> &ScalarProfile {
        &self.a
    }

    pub fn a_bounds(&self) -> (f64, f64) {
        self.a_bounds
    }

    /// Evaluates `a(x)`; outside the declared bounds is an error.
    pub fn a_at(&self, x: &Vector<D>) -> Result<f64> {
        let v = self.a.eval(x);
        let (lo, hi) = self.a_bounds;
        let slack = 1e-12 * (1.0 + hi.abs());
        if !v.is_finite() || v < lo - slack || v > hi + slack {
            return Err(WntError::InvalidInput(format!(
                "a(x) = {v} outside declared bounds [{lo}, {hi}] at {x:?}"
            )));
        }
        Ok(v.max(0.0))
    }

    /// Whether the weight vanishes identically (pure quadratic fibers).
    pub fn is_quadratic(&self) -> bool {
        self.a.is_identically_zero()
    }

    /// Largest eigenvalue of `g⁻¹`, an upper bound on `D²H` everywhere.
    pub fn dual_hessian_bound(&self) -> f64 {
        let ev = linalg::sym_eigenvalues(&self.g_inv);
        ev[D - 1]
    }
}

fn check_spd<const D: usize>(name: &str, m: &Matrix<D>) -> Result<()> {
    if m.iter().flat_map(|r| r.iter()).any(|v| !v.is_finite()) {
        return Err(WntError::InvalidInput(format!("{name} has non-finite entries")));
    }
    if !linalg::is_symmetric(m, 1e-12) {
        return Err(WntError::InvalidInput(format!("{name} is not symmetric")));
    }
    let ev = linalg::sym_eigenvalues(m);
    if ev[0] <= 0.0 {
        return Err(WntError::InvalidInput(format!(
            "{name} is not positive definite (smallest eigenvalue {})",
            ev[0]
        )));
    }
    Ok(())
}

/// `R(θ) diag(λ) R(θ)ᵀ` in the plane.
pub fn rotated_metric_2d(angle: f64, eigenvalues: [f64; 2]) -> Matrix<2> {
    let (s, c) = angle.sin_cos();
    let r = [[c, -s], [s, c]];
    let d = linalg::diag(&eigenvalues);
    linalg::mat_mul(&linalg::mat_mul(&r, &d), &linalg::transpose(&r))
}

/// Rotation about the z axis by `angle`, applied to `diag(λ)`.
pub fn rotated_metric_3d(angle: f64, eigenvalues: [f64; 3]) -> Matrix<3> {
    let (s, c) = angle.sin_cos();
    let r = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
    let d = linalg::diag(&eigenvalues);
    linalg::mat_mul(&linalg::mat_mul(&r, &d), &linalg::transpose(&r))
}
