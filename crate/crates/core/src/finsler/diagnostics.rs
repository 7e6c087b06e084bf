use serde::Serialize;

use crate::error::Result;
use crate::linalg::{self, Vector};

use super::WntStructure;

/// Empirical structure constants gathered from sampled fiber pairs.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StructureReport {
    pub pairs_checked: usize,
    /// Pairs with `⟨L(y₁) − L(y₂), y₁ − y₂⟩ < 0` beyond round-off.
    pub primal_monotonicity_violations: usize,
    /// Pairs with `⟨∂H(ξ₁) − ∂H(ξ₂), ξ₁ − ξ₂⟩ < 0` beyond round-off.
    pub dual_monotonicity_violations: usize,
    /// `min ⟨L(y₁) − L(y₂), y₁ − y₂⟩ / |y₁ − y₂|²`, an estimate of `m_{K,B}`.
    pub strong_monotonicity: f64,
    /// `max |∂H(ξ₁) − ∂H(ξ₂)| / |ξ₁ − ξ₂|` on the sampled set.
    pub dual_lipschitz: f64,
    /// `min Φ(y) / |y|^p` over samples with `|y| ≥ 1` (estimate of `c_K`).
    pub growth_lower: f64,
    /// `max Φ(y) / (1 + |y|^p)` (estimate of `C_K`).
    pub growth_upper: f64,
    /// Log–log slope of `t ↦ Φ(t y)` for large `t`.
    pub growth_exponent: f64,
    /// Log–log slope of `t ↦ H(t ξ)` for large `t`.
    pub dual_growth_exponent: f64,
    pub expected_p: f64,
    pub expected_p_dual: f64,
}

impl StructureReport {
    pub fn violations(&self) -> usize {
        self.primal_monotonicity_violations + self.dual_monotonicity_violations
    }
}

/// Fit of the slope of `log f(t)` against `log t` over `t ∈ [t0, t1]`.
pub fn loglog_slope(f: impl Fn(f64) -> Result<f64>, t0: f64, t1: f64, points: usize) -> Result<f64> {
    let n = points.max(2);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for k in 0..n {
        let lt = t0.ln() + (t1.ln() - t0.ln()) * k as f64 / (n - 1) as f64;
        xs.push(lt);
        ys.push(f(lt.exp())?.ln());
    }
    Ok(least_squares(&xs, &ys).0)
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Checks monotonicity and growth of the Legendre map and of the dual flux on
/// the given `(x, v₁, v₂)` samples. The vectors are used both as tangent
/// vectors (primal checks) and as covectors (dual checks).
///
/// Growth exponents are fitted along the ray through the first sample's `v₁`,
/// for `t ∈ [10³, 10⁵]`.
pub fn check_structure<const D: usize>(
    s: &WntStructure<D>,
    samples: &[(Vector<D>, Vector<D>, Vector<D>)],
) -> Result<StructureReport> {
    let p = s.p();
    let mut primal_viol = 0;
    let mut dual_viol = 0;
    let mut strong = f64::INFINITY;
    let mut lip: f64 = 0.0;
    let mut lower = f64::INFINITY;
    let mut upper: f64 = 0.0;
    for (x, v1, v2) in samples {
        let d = linalg::sub(v1, v2);
        let d2 = linalg::dot(&d, &d);
        if d2 == 0.0 {
            continue;
        }
        let l1 = s.legendre(x, v1)?;
        let l2 = s.legendre(x, v2)?;
        let dl = linalg::sub(&l1, &l2);
        let primal = linalg::dot(&dl, &d);
        let scale_p = linalg::norm(&dl) * d2.sqrt();
        if primal < -1e-12 * (1.0 + scale_p) {
            primal_viol += 1;
        }
        strong = strong.min(primal / d2);

        let y1 = s.dual_gradient(x, v1)?;
        let y2 = s.dual_gradient(x, v2)?;
        let dy = linalg::sub(&y1, &y2);
        let dual = linalg::dot(&dy, &d);
        let scale_d = linalg::norm(&dy) * d2.sqrt();
        if dual < -1e-12 * (1.0 + scale_d) {
            dual_viol += 1;
        }
        lip = lip.max(linalg::norm(&dy) / d2.sqrt());

        for v in [v1, v2] {
            let r = linalg::norm(v);
            let phi = s.phi(x, v)?;
            if r >= 1.0 {
                lower = lower.min(phi / r.powf(p));
            }
            upper = upper.max(phi / (1.0 + r.powf(p)));
        }
    }
    let (growth_exponent, dual_growth_exponent) = match samples.iter().find(|(_, v, _)| linalg::norm(v) > 0.0) {
        Some((x, v, _)) => {
            let dir = linalg::scale(v, 1.0 / linalg::norm(v));
            let gp = loglog_slope(|t| s.phi(x, &linalg::scale(&dir, t)), 1e3, 1e5, 9)?;
            let gd = loglog_slope(|t| s.hamiltonian(x, &linalg::scale(&dir, t)), 1e3, 1e5, 9)?;
            (gp, gd)
        }
        None => (f64::NAN, f64::NAN),
    };
    Ok(StructureReport {
        pairs_checked: samples.len(),
        primal_monotonicity_violations: primal_viol,
        dual_monotonicity_violations: dual_viol,
        strong_monotonicity: strong,
        dual_lipschitz: lip,
        growth_lower: lower,
        growth_upper: upper,
        growth_exponent,
        dual_growth_exponent,
        expected_p: p,
        expected_p_dual: s.p_dual(),
    })
}

/// Comparison of the true conjugate with the closed form
/// `½⟨g⁻¹ξ,ξ⟩ + C a^{-1/η} ⟨h⁻¹ξ,ξ⟩^{1+1/η}`, with `C` fitted by least squares.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClosedFormFit {
    pub c_eta: f64,
    /// Root mean square of (closed form − true H) over the samples.
    pub rms_residual: f64,
    /// Largest relative residual `|closed − true| / max(true, 1e-12)`.
    pub max_relative_residual: f64,
}

pub fn closed_form_dual_fit<const D: usize>(
    s: &WntStructure<D>,
    x: &Vector<D>,
    xis: &[Vector<D>],
) -> Result<ClosedFormFit> {
    let an = s.anisotropy();
    let a = an.a_at(x)?;
    let eta = an.eta();
    let mut rows = Vec::with_capacity(xis.len());
    for xi in xis {
        let truth = s.hamiltonian(x, xi)?;
        let quad = 0.5 * linalg::quad(an.g_inv(), xi);
        let basis = if a > 0.0 {
            a.powf(-1.0 / eta) * linalg::quad(an.h_inv(), xi).powf(1.0 + 1.0 / eta)
        } else {
            0.0
        };
        rows.push((truth, quad, basis));
    }
    let num: f64 = rows.iter().map(|(t, q, b)| (t - q) * b).sum();
    let den: f64 = rows.iter().map(|(_, _, b)| b * b).sum();
    let c_eta = if den > 0.0 { num / den } else { 0.0 };
    let mut sq = 0.0;
    let mut worst: f64 = 0.0;
    for (t, q, b) in &rows {
        let r = q + c_eta * b - t;
        sq += r * r;
        worst = worst.max(r.abs() / t.max(1e-12));
    }
    Ok(ClosedFormFit {
        c_eta,
        rms_residual: (sq / rows.len().max(1) as f64).sqrt(),
        max_relative_residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::AnisotropyField;

    #[test]
    fn euclidean_structure_has_no_violations_and_quadratic_growth() {
        let s = WntStructure::<2>::euclidean();
        let samples: Vec<_> = (0..100)
            .map(|k| {
                let t = k as f64 * 0.37;
                ([0.1, 0.2], [t.sin() * 3.0, t.cos()], [(2.0 * t).cos(), -t.sin() * 2.0])
            })
            .collect();
        let rep = check_structure(&s, &samples).unwrap();
        assert_eq!(rep.violations(), 0);
        assert!((rep.growth_exponent - 2.0).abs() < 1e-9);
        assert!((rep.dual_growth_exponent - 2.0).abs() < 1e-9);
        assert!((rep.strong_monotonicity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn double_phase_growth_exponents() {
        let s = WntStructure::<2>::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
        let samples = vec![([0.0, 0.0], [1.0, 0.5], [0.2, -0.3])];
        let rep = check_structure(&s, &samples).unwrap();
        assert!((rep.growth_exponent - 3.0).abs() < 0.05);
        assert!((rep.dual_growth_exponent - 1.5).abs() < 0.05);
    }

    #[test]
    fn closed_form_is_exact_in_the_quadratic_case() {
        let s = WntStructure::<2>::euclidean();
        let fit = closed_form_dual_fit(&s, &[0.0, 0.0], &[[1.0, 2.0], [0.3, -0.1]]).unwrap();
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn least_squares_recovers_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (m, b) = least_squares(&xs, &ys);
        assert!((m - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
    }
}
