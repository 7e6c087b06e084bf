use std::f64::consts::PI;

use proptest::prelude::*;

use wnt_core::elliptic::{green_kernel, LinearizedOperator};
use wnt_core::filament3d::{normal_velocities, signed_curvature, Filament, FilamentSystem};
use wnt_core::finsler::{hamiltonian_oracle, oracle_spacing, rotated_metric_2d, AnisotropyField, ScalarProfile, WntStructure};
use wnt_core::gl_field::{boundary_degree, jacobian_field, ComplexGridField};
use wnt_core::grid::{GridDomain, GridField};
use wnt_core::linalg;
use wnt_core::thermal::{solve_temperature, HeatSource};

fn structure() -> impl Strategy<Value = WntStructure<2>> {
    (0.0..PI, 0.5..3.0f64, 0.5..3.0f64, 0.0..PI, 0.5..2.0f64, 0.0..2.0f64, 0.1..=1.0f64).prop_map(
        |(ag, g1, g2, ah, h1, a, eta)| {
            let an = AnisotropyField::new(
                rotated_metric_2d(ag, [g1, g2]),
                rotated_metric_2d(ah, [h1, 1.0]),
                ScalarProfile::Sinusoidal {
                    mean: a,
                    amplitude: 0.5 * a,
                    wavevector: vec![3.0, -2.0],
                    phase: 0.0,
                },
                eta,
                Some((0.5 * a, 1.5 * a)),
            )
            .unwrap();
            WntStructure::new(an)
        },
    )
}

fn vec2(r: f64) -> impl Strategy<Value = [f64; 2]> {
    [-r..r, -r..r]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fenchel_young_equality(s in structure(), x in vec2(1.0), y in vec2(7.0)) {
        let xi = s.legendre(&x, &y).unwrap();
        let gap = s.phi(&x, &y).unwrap() + s.hamiltonian(&x, &xi).unwrap() - linalg::dot(&xi, &y);
        prop_assert!(gap.abs() <= 1e-8 * (1.0 + linalg::dot(&xi, &y).abs()), "gap {gap}");
    }

    #[test]
    fn inversion_round_trip(s in structure(), x in vec2(1.0), y in vec2(7.0)) {
        let xi = s.legendre(&x, &y).unwrap();
        let back = s.dual_gradient(&x, &xi).unwrap();
        prop_assert!(linalg::norm(&linalg::sub(&back, &y)) <= 1e-8 * (1.0 + linalg::norm(&y)));
    }

    #[test]
    fn legendre_map_is_monotone(s in structure(), x in vec2(1.0), y1 in vec2(10.0), y2 in vec2(10.0)) {
        let d = linalg::sub(&y1, &y2);
        let dl = linalg::sub(&s.legendre(&x, &y1).unwrap(), &s.legendre(&x, &y2).unwrap());
        prop_assert!(linalg::dot(&dl, &d) >= -1e-12 * (1.0 + linalg::norm(&dl) * linalg::norm(&d)));
    }

    #[test]
    fn hamiltonian_is_midpoint_convex(s in structure(), x in vec2(1.0), a in vec2(20.0), b in vec2(20.0)) {
        let mid = linalg::scale(&linalg::add(&a, &b), 0.5);
        let lhs = s.hamiltonian(&x, &mid).unwrap();
        let rhs = 0.5 * (s.hamiltonian(&x, &a).unwrap() + s.hamiltonian(&x, &b).unwrap());
        prop_assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()), "{lhs} > {rhs}");
    }

    #[test]
    fn dual_hessian_matches_finite_differences(s in structure(), x in vec2(1.0), xi in vec2(10.0)) {
        prop_assume!(linalg::norm(&xi) > 0.5);
        let hess = s.dual_hessian(&x, &xi).unwrap();
        let h = 1e-5 * (1.0 + linalg::norm(&xi));
        let scale = hess.iter().flat_map(|r| r.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..2 {
            let mut p = xi;
            let mut m = xi;
            p[k] += h;
            m[k] -= h;
            let gp = s.dual_gradient(&x, &p).unwrap();
            let gm = s.dual_gradient(&x, &m).unwrap();
            for r in 0..2 {
                let fd = (gp[r] - gm[r]) / (2.0 * h);
                prop_assert!((fd - hess[r][k]).abs() <= 1e-4 * scale, "{fd} vs {}", hess[r][k]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn oracle_is_consistent_with_inversion(s in structure(), x in vec2(1.0), xi in vec2(3.0)) {
        let y = s.dual_gradient(&x, &xi).unwrap();
        let radius = 1.5 * linalg::norm(&y) + 0.5;
        let samples = 201;
        let h = s.hamiltonian(&x, &xi).unwrap();
        let o = hamiltonian_oracle(&s, &x, &xi, radius, samples).unwrap();
        let bound = 3.0 * oracle_spacing(radius, samples) * linalg::norm(&xi);
        prop_assert!(o <= h + 1e-12 * (1.0 + h));
        prop_assert!(h - o <= bound + 1e-12, "{h} vs {o} (bound {bound})");
    }
}

fn vortex_field(dom: GridDomain<2>, centers: &[([f64; 2], i32)]) -> ComplexGridField {
    ComplexGridField::vortex_product(dom, centers, 0.05)
}

fn center_in_box() -> impl Strategy<Value = [f64; 2]> {
    [0.2..0.8f64, 0.2..0.8f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn degree_ignores_the_global_phase(c in center_in_box(), d in -2i32..=2, phi in -PI..PI) {
        let u = vortex_field(GridDomain::unit(32).unwrap(), &[(c, d)]);
        let a = boundary_degree(&u).unwrap();
        let b = boundary_degree(&u.rotate_phase(phi)).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!((a - d as f64).abs() < 1e-9);
        let ja = jacobian_field(&u).total();
        let jb = jacobian_field(&u.rotate_phase(phi)).total();
        prop_assert!((ja - jb).abs() < 1e-9);
    }

    #[test]
    fn product_degrees_add(c1 in center_in_box(), c2 in center_in_box(), d1 in -2i32..=2, d2 in -2i32..=2) {
        let dom = GridDomain::unit(32).unwrap();
        let u = vortex_field(dom, &[(c1, d1)]);
        let v = vortex_field(dom, &[(c2, d2)]);
        let uv = u.mul(&v).unwrap();
        let total = boundary_degree(&uv).unwrap();
        prop_assert!((total - (d1 + d2) as f64).abs() < 1e-9, "{total}");
    }

    #[test]
    fn green_kernels_are_nonnegative_and_symmetric(i in 1usize..15, j in 1usize..15, k in 1usize..15, l in 1usize..15) {
        let dom = GridDomain::unit(16).unwrap();
        let op = LinearizedOperator::constant(&dom, rotated_metric_2d(0.4, [1.0, 3.0])).unwrap();
        let (p, q) = (dom.node_index(&[i, j]), dom.node_index(&[k, l]));
        let gp = green_kernel(&op, p, 1e-12).unwrap();
        let gq = green_kernel(&op, q, 1e-12).unwrap();
        prop_assert!(gp.values().iter().all(|&v| v >= -1e-12));
        prop_assert!((gp.values()[q] - gq.values()[p]).abs() <= 1e-9 * gp.values()[p]);
    }

    #[test]
    fn temperature_superposes(c1 in center_in_box(), c2 in center_in_box(), w in 0.005..0.05f64, sigma in 0.1..3.0f64) {
        let dom = GridDomain::unit(24).unwrap();
        let op = LinearizedOperator::laplacian(&dom);
        let bump = |c: [f64; 2]| GridField::from_fn(dom, move |p: &[f64; 2]| (-((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / w).exp());
        let a = HeatSource::new(bump(c1), sigma, 0.8).unwrap();
        let b = HeatSource::new(bump(c2), sigma, 0.8).unwrap();
        let ta = solve_temperature(&a, &op, 1e-12).unwrap().temperature;
        let tb = solve_temperature(&b, &op, 1e-12).unwrap().temperature;
        let tab = solve_temperature(&a.superpose(&b).unwrap(), &op, 1e-12).unwrap().temperature;
        let scale = tab.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for i in 0..dom.num_nodes() {
            prop_assert!((tab.values()[i] - ta.values()[i] - tb.values()[i]).abs() <= 1e-8 * scale);
        }
        prop_assert!(tab.mean().abs() <= 1e-12);
    }
}

fn ellipse(a: f64, b: f64, n: usize) -> Filament {
    let v = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [a * t.cos(), b * t.sin(), 0.0]
        })
        .collect();
    Filament::new(v, true, 1).unwrap()
}

fn rotation(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    let rz = [[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
    let rx = [[1.0, 0.0, 0.0], [0.0, cc, -sc], [0.0, sc, cc]];
    linalg::mat_mul(&rz, &linalg::mat_mul(&ry, &rx))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn curvature_flips_under_reversal(a in 0.5..2.0f64, b in 0.5..2.0f64, n in 16usize..80, k in 0usize..80) {
        let k = k % n;
        let f = ellipse(a, b, n);
        let rev = f.reversed();
        let s1 = FilamentSystem::euclidean(vec![f], 0.01).unwrap();
        let s2 = FilamentSystem::euclidean(vec![rev], 0.01).unwrap();
        let axis = [0.0, 0.0, 1.0];
        let c1 = signed_curvature(&s1, 0, k, &axis).unwrap().value;
        let c2 = signed_curvature(&s2, 0, (n - k) % n, &axis).unwrap().value;
        prop_assert!((c1 + c2).abs() <= 1e-12 * c1.abs().max(1.0));
    }

    #[test]
    fn velocities_rotate_with_the_system(a in -PI..PI, b in -PI..PI, c in -PI..PI, shift in [-1.0..1.0f64, -1.0..1.0, -1.0..1.0], sigma in 0.0..2.0f64) {
        let f1 = ellipse(1.0, 0.7, 40);
        let f2 = Filament::circle([0.1, -0.2, 0.8], 0.5, 32, -1).unwrap();
        let an = AnisotropyField::isotropic_double_phase(0.6, 0.5).unwrap();
        let sys = FilamentSystem::new(vec![f1, f2], an, sigma, 1.0, 0.05).unwrap();
        let q = rotation(a, b, c);
        let moved = sys.transformed(&q, &shift);
        let v0 = normal_velocities(&sys).unwrap();
        let v1 = normal_velocities(&moved).unwrap();
        for (fa, fb) in v0.velocities.iter().zip(&v1.velocities) {
            for (x, y) in fa.iter().zip(fb) {
                prop_assert!(linalg::norm(&linalg::sub(&linalg::matvec(&q, x), y)) <= 1e-8);
            }
        }
    }
}
