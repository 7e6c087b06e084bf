use super::energy::double_well;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, roots found by Newton's
/// method on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `∫_{−1}^{1} √(2W(s)) ds` by `n`-point Gauss–Legendre quadrature.
pub fn modica_mortola_c0_with(n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    x.iter().zip(&w).map(|(s, wi)| wi * (2.0 * double_well(*s)).sqrt()).sum()
}

/// Interface constant `c₀ = ∫_{−1}^{1} √(2W(s)) ds`.
pub fn modica_mortola_c0() -> f64 {
    modica_mortola_c0_with(16)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_values() {
        assert_eq!(double_well(1.0), 0.0);
        assert_eq!(double_well(-1.0), 0.0);
        assert_eq!(double_well(0.0), 0.25);
    }

    #[test]
    fn c0_matches_closed_form() {
        let exact = 2.0 * 2f64.sqrt() / 3.0;
        assert!((modica_mortola_c0() - exact).abs() < 1e-10);
        assert!((modica_mortola_c0_with(10) - modica_mortola_c0_with(10_000)).abs() < 1e-8);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let int: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(8)).sum();
        assert!((int - 2.0 / 9.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
