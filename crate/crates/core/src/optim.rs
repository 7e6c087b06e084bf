//! Krylov and nonlinear conjugate-gradient solvers on flat vectors.

use crate::error::{Result, WntError};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final `‖b − A x‖ / ‖b‖`.
    pub relative_residual: f64,
}

/// Conjugate gradient for an SPD operator. `apply(x, out)` must write `A x`
/// into `out`. `x` holds the initial guess and receives the solution.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rel = rr.sqrt() / bnorm;
        if rel <= rel_tol {
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: rel,
            });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(WntError::NonConvergence {
                solver: "conjugate gradient (operator not positive definite)",
                iterations: it,
                residual: rel,
            });
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    let rel = rr.sqrt() / bnorm;
    if rel <= rel_tol {
        Ok(CgOutcome {
            iterations: max_iter,
            relative_residual: rel,
        })
    } else {
        Err(WntError::NonConvergence {
            solver: "conjugate gradient",
            iterations: max_iter,
            residual: rel,
        })
    }
}

/// A smooth objective on `ℝⁿ` for [`minimize_ncg`].
pub trait Objective {
    /// Returns the value and writes the gradient into `grad`.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64>;

    /// Convergence measure evaluated on a gradient (e.g. a scaled sup-norm).
    fn stationarity(&self, grad: &[f64]) -> f64;

    /// Applies an (approximate) inverse preconditioner: `out ≈ P⁻¹ grad`.
    fn precondition(&self, grad: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(grad);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NcgOutcome {
    pub iterations: usize,
    pub stationarity: f64,
    pub value: f64,
    /// Objective value after every accepted iteration (index 0 = initial).
    pub history: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcgOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial trial step along each search direction.
    pub initial_step: f64,
}

impl Default for NcgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            initial_step: 1.0,
        }
    }
}

/// Preconditioned Polak–Ribière+ nonlinear conjugate gradient.
///
/// The line search uses secant steps on the directional derivative (exact on
/// quadratics) and accepts only points with sufficient decrease, up to
/// round-off in the objective value.
pub fn minimize_ncg<O: Objective>(obj: &O, x: &mut [f64], opts: NcgOptions) -> Result<NcgOutcome> {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut f = obj.value_and_gradient(x, &mut g)?;
    let mut z = vec![0.0; n];
    obj.precondition(&g, &mut z)?;
    let mut d: Vec<f64> = z.iter().map(|v| -v).collect();
    let mut gz = dot(&g, &z);
    let mut history = vec![f];
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut step_guess = opts.initial_step;
    let mut stat = obj.stationarity(&g);

    for it in 0..opts.max_iter {
        if stat <= opts.tol {
            return Ok(NcgOutcome {
                iterations: it,
                stationarity: stat,
                value: f,
                history,
                converged: true,
            });
        }
        let mut slope0 = dot(&g, &d);
        if !(slope0 < 0.0) {
            // restart along the preconditioned steepest descent direction
            for i in 0..n {
                d[i] = -z[i];
            }
            slope0 = -gz;
            if !(slope0 < 0.0) {
                break;
            }
        }

        let (alpha, f_new) = match line_search(obj, x, &d, f, slope0, step_guess, &mut trial, &mut g_trial)? {
            Some(v) => v,
            None => break,
        };
        for i in 0..n {
            x[i] += alpha * d[i];
        }
        let f_eval = obj.value_and_gradient(x, &mut g_trial)?;
        debug_assert!((f_eval - f_new).abs() <= 1e-9 * (1.0 + f_new.abs()));
        f = f_eval;
        history.push(f);
        step_guess = alpha;

        let mut z_new = vec![0.0; n];
        obj.precondition(&g_trial, &mut z_new)?;
        let gz_new = dot(&g_trial, &z_new);
        let mut num = 0.0;
        for i in 0..n {
            num += g_trial[i] * (z_new[i] - z[i]);
        }
        let beta = if gz > 0.0 { (num / gz).max(0.0) } else { 0.0 };
        for i in 0..n {
            d[i] = -z_new[i] + beta * d[i];
        }
        std::mem::swap(&mut g, &mut g_trial);
        z = z_new;
        gz = gz_new;
        stat = obj.stationarity(&g);
    }
    Ok(NcgOutcome {
        iterations: history.len() - 1,
        stationarity: stat,
        value: f,
        converged: stat <= opts.tol,
        history,
    })
}

/// Bracketing secant search for `φ(α) = f(x + α d)`. Returns an accepted
/// step with sufficient decrease, preferring one that also satisfies a strong
/// curvature condition.
#[allow(clippy::too_many_arguments)]
fn line_search<O: Objective>(
    obj: &O,
    x: &[f64],
    d: &[f64],
    f0: f64,
    slope0: f64,
    guess: f64,
    trial: &mut [f64],
    g_trial: &mut [f64],
) -> Result<Option<(f64, f64)>> {
    let n = x.len();
    let mut lo = 0.0;
    let mut s_lo = slope0;
    let mut hi: Option<(f64, f64)> = None;
    let mut alpha = guess;
    let mut best: Option<(f64, f64)> = None;
    // value differences below this are round-off; the slope decides instead
    let noise = 1e-12 * (f0.abs() + 1e-300);
    for _ in 0..40 {
        for i in 0..n {
            trial[i] = x[i] + alpha * d[i];
        }
        let ft = obj.value_and_gradient(trial, g_trial)?;
        let st = dot(g_trial, d);
        let insufficient = ft > f0 + 1e-4 * alpha * slope0 && (ft - f0).abs() > noise;
        if !ft.is_finite() || !st.is_finite() || insufficient {
            hi = Some((alpha, if st.is_finite() { st } else { f64::INFINITY }));
        } else {
            if best.is_none_or(|(_, fb)| ft <= fb) {
                best = Some((alpha, ft));
            }
            if st.abs() <= 0.1 * slope0.abs() {
                return Ok(Some((alpha, ft)));
            }
            if st < 0.0 {
                lo = alpha;
                s_lo = st;
            } else {
                hi = Some((alpha, st));
            }
        }
        alpha = match hi {
            None => {
                // extrapolate: secant root of φ' from (0, slope0) through (lo, s_lo)
                let next = if s_lo > slope0 { lo * slope0 / (slope0 - s_lo) } else { 4.0 * lo };
                next.clamp(1.5 * lo, 8.0 * lo)
            }
            Some((a_hi, s_hi)) => {
                let width = a_hi - lo;
                let next = if s_hi.is_finite() && s_hi > s_lo { lo - s_lo * width / (s_hi - s_lo) } else { lo + 0.5 * width };
                if next > lo + 0.01 * width && next < a_hi - 0.01 * width {
                    next
                } else {
                    lo + 0.5 * width
                }
            }
        };
        if let Some((a_hi, _)) = hi {
            if a_hi - lo <= 1e-14 * a_hi.max(1e-300) {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(x: &[f64], out: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let l = if i > 0 { x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] } else { 0.0 };
            out[i] = 2.0 * x[i] - l - r;
        }
    }

    #[test]
    fn cg_solves_tridiagonal_system() {
        let n = 50;
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let out = conjugate_gradient(laplacian_1d, &b, &mut x, 1e-12, 200).unwrap();
        assert!(out.iterations <= n);
        // exact solution x_i = (i+1)(n-i)/2
        for (i, v) in x.iter().enumerate() {
            let exact = ((i + 1) * (n - i)) as f64 / 2.0;
            assert!((v - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn cg_reports_non_convergence() {
        let b = vec![1.0; 100];
        let mut x = vec![0.0; 100];
        let err = conjugate_gradient(laplacian_1d, &b, &mut x, 1e-14, 3).unwrap_err();
        assert!(matches!(err, WntError::NonConvergence { iterations: 3, .. }));
    }

    struct Rosen;
    impl Objective for Rosen {
        fn value_and_gradient(&self, x: &[f64], g: &mut [f64]) -> Result<f64> {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            Ok((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2))
        }
        fn stationarity(&self, g: &[f64]) -> f64 {
            g.iter().fold(0.0, |m, v| m.max(v.abs()))
        }
    }

    #[test]
    fn ncg_minimizes_rosenbrock_monotonically() {
        let mut x = vec![-1.2, 1.0];
        let out = minimize_ncg(&Rosen, &mut x, NcgOptions { tol: 1e-9, max_iter: 5000, initial_step: 1e-3 }).unwrap();
        assert!(out.converged, "{out:?}");
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
    }
}
