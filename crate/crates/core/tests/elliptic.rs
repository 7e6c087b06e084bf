use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wnt_core::elliptic::*;
use wnt_core::finsler::{AnisotropyField, WntStructure};
use wnt_core::grid::{GridDomain, GridField};

/// Centre value of `−Δu = 1` on the unit square with zero boundary data, from
/// the double sine series.
fn poisson_centre_series() -> f64 {
    let mut sum = 0.0;
    for m in (1..2000).step_by(2) {
        for n in (1..2000).step_by(2) {
            let sign = if ((m + n) / 2) % 2 == 1 { 1.0 } else { -1.0 };
            let (mf, nf) = (m as f64, n as f64);
            sum += sign / (mf * nf * (mf * mf + nf * nf));
        }
    }
    16.0 / PI.powi(4) * sum
}

fn poisson_centre(n: usize) -> (f64, DirichletSolution<2>) {
    let dom = GridDomain::<2>::unit(n).unwrap();
    let f = GridField::from_fn(dom, |_| 1.0);
    let sol = solve_dirichlet(&WntStructure::euclidean(), &f, &GridField::zeros(dom), None, DirichletOptions::for_dim(2))
        .unwrap();
    (sol.u.get(&[n / 2, n / 2]), sol)
}

#[test]
fn series_oracle_value() {
    assert!((poisson_centre_series() - 0.0736713532814).abs() < 1e-9);
}

#[test]
fn poisson_centre_value_on_129_nodes() {
    let exact = poisson_centre_series();
    let (c, sol) = poisson_centre(128);
    let h = 1.0 / 128.0;
    assert!((c - exact).abs() <= 2.0 * h * h, "{c} vs {exact}");
    assert!(sol.residual <= 1e-8);
    assert!(sol.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
}

#[test]
fn poisson_refinement_is_second_order() {
    let exact = poisson_centre_series();
    let e1 = (poisson_centre(32).0 - exact).abs();
    let e2 = (poisson_centre(64).0 - exact).abs();
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn affine_data_is_reproduced() {
    let dom = GridDomain::<2>::unit(16).unwrap();
    let exact = GridField::from_fn(dom, |p| p[0]);
    let sol = solve_dirichlet(&WntStructure::euclidean(), &GridField::zeros(dom), &exact, None, DirichletOptions::for_dim(2))
        .unwrap();
    assert!(sol.u.sup_distance(&exact).unwrap() < 1e-9);
}

#[test]
fn double_phase_ramp_is_discrete_solution() {
    // constant cell gradient ⇒ every interior flux balance cancels
    let dom = GridDomain::<2>::unit(16).unwrap();
    let s = WntStructure::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
    let exact = GridField::from_fn(dom, |p| 2.0 * p[0] - p[1]);
    let sol = solve_dirichlet(&s, &GridField::zeros(dom), &exact, None, DirichletOptions::for_dim(2)).unwrap();
    assert!(sol.u.sup_distance(&exact).unwrap() < 1e-8);
}

#[test]
fn double_phase_solution_is_unique() {
    let dom = GridDomain::<2>::unit(32).unwrap();
    let s = WntStructure::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
    let f = GridField::from_fn(dom, |p| 20.0 * (PI * p[0]).sin() + 5.0);
    let bnd = GridField::from_fn(dom, |p| p[0] * p[1]);
    let opts = DirichletOptions::for_dim(2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sols = Vec::new();
    for _ in 0..3 {
        let vals = (0..dom.num_nodes()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let init = GridField::from_values(dom, vals).unwrap();
        let sol = solve_dirichlet(&s, &f, &bnd, Some(&init), opts).unwrap();
        assert!(sol.residual <= opts.tol);
        assert!(dirichlet_residual(&s, &f, &sol.u).unwrap() <= opts.tol);
        assert!(sol.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
        sols.push(sol.u);
    }
    for k in 1..3 {
        let d = sols[0].sup_distance(&sols[k]).unwrap();
        assert!(d <= 10.0 * opts.tol, "{d}");
    }
}

#[test]
fn three_dimensional_poisson_converges() {
    let dom = GridDomain::<3>::unit(16).unwrap();
    let f = GridField::from_fn(dom, |_| 1.0);
    let opts = DirichletOptions::for_dim(3);
    let s = WntStructure::new(AnisotropyField::isotropic_double_phase(0.5, 1.0).unwrap());
    let sol = solve_dirichlet(&s, &f, &GridField::zeros(dom), None, opts).unwrap();
    assert!(sol.residual <= 1e-7);
}

#[test]
fn non_convergence_is_reported() {
    let dom = GridDomain::<2>::unit(32).unwrap();
    let f = GridField::from_fn(dom, |_| 1.0);
    let err = solve_dirichlet(
        &WntStructure::euclidean(),
        &f,
        &GridField::zeros(dom),
        None,
        DirichletOptions { tol: 1e-30, max_iter: 2 },
    )
    .unwrap_err();
    assert!(matches!(err, wnt_core::WntError::NonConvergence { .. }), "{err}");
}

#[test]
fn stability_identical_data() {
    let dom = GridDomain::<2>::unit(16).unwrap();
    let d = DirichletData { f: GridField::from_fn(dom, |_| 1.0), boundary: GridField::zeros(dom) };
    let rep = check_stability(&WntStructure::euclidean(), &[(d.clone(), d)], DirichletOptions::for_dim(2)).unwrap();
    assert_eq!(rep.entries[0].monotone_form, 0.0);
    assert_eq!(rep.entries[0].gradient_gap_p, 0.0);
    assert!(rep.satisfied);
}

#[test]
fn stability_linear_poincare_bound() {
    let dom = GridDomain::<2>::unit(24).unwrap();
    let a = DirichletData { f: GridField::from_fn(dom, |_| 1.0), boundary: GridField::zeros(dom) };
    let b = DirichletData { f: GridField::from_fn(dom, |p| 1.0 + (3.0 * p[0]).sin()), boundary: GridField::zeros(dom) };
    let rep = check_stability(&WntStructure::euclidean(), &[(a, b)], DirichletOptions::for_dim(2)).unwrap();
    let e = &rep.entries[0];
    assert!(e.dependence_ratio.unwrap() <= e.poincare_bound.unwrap());
    assert!(rep.satisfied);
}

#[test]
fn stability_double_phase_sweep() {
    let dom = GridDomain::<2>::unit(16).unwrap();
    let s = WntStructure::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pairs = Vec::new();
    for _ in 0..10 {
        let (c1, c2, k) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(1.0..4.0));
        let bnd = GridField::from_fn(dom, |p| (k * p[0]).cos() * p[1]);
        pairs.push((
            DirichletData { f: GridField::from_fn(dom, |_| c1), boundary: bnd.clone() },
            DirichletData { f: GridField::from_fn(dom, |p| c2 * p[1]), boundary: bnd },
        ));
    }
    let rep = check_stability(&s, &pairs, DirichletOptions::for_dim(2)).unwrap();
    assert!(rep.satisfied, "{rep:?}");
    assert!(rep.c_min.unwrap() > 0.0);
}
