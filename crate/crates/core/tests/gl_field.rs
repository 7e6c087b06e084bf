use std::f64::consts::PI;

use wnt_core::finsler::{AnisotropyField, WntStructure};
use wnt_core::gl_field::*;
use wnt_core::grid::GridDomain;
use wnt_core::WntError;

fn unit(n: usize) -> GridDomain<2> {
    GridDomain::<2>::unit(n).unwrap()
}

#[test]
fn constant_fields() {
    let s = WntStructure::euclidean();
    assert_eq!(energy_eps(&s, &ComplexGridField::constant(unit(16), 1.0, 0.0), 0.1).unwrap(), 0.0);
    let e = energy_eps(&s, &ComplexGridField::constant(unit(16), 0.0, 0.0), 0.1).unwrap();
    assert!((e - 1.0 / (4.0 * 0.01)).abs() < 1e-10);
    assert!(matches!(energy_eps(&s, &ComplexGridField::constant(unit(16), 0.0, 0.0), 0.0), Err(WntError::InvalidInput(_))));
}

#[test]
fn annulus_phase_energy_is_logarithmic() {
    let dom = unit(256);
    let u = ComplexGridField::from_fn(dom, |p| {
        let th = (p[1] - 0.5).atan2(p[0] - 0.5);
        (th.cos(), th.sin())
    });
    let (r0, r1) = (0.05, 0.45);
    let e = dirichlet_energy_in(&WntStructure::euclidean(), &u, |c| {
        let r = (c[0] - 0.5).hypot(c[1] - 0.5);
        r >= r0 && r <= r1
    })
    .unwrap();
    let exact = PI * (r1 / r0).ln();
    assert!((e - exact).abs() <= 0.05 * exact, "{e} vs {exact}");
}

#[test]
fn unit_field_is_a_fixed_point() {
    let s = WntStructure::euclidean();
    let mut st = FlowState::new(&s, ComplexGridField::constant(unit(16), 1.0, 0.0), 0.1).unwrap();
    let flow = GlFlow::new(&s, &unit(16), 0.1).unwrap();
    for _ in 0..10 {
        flow.step(&mut st, flow.dt_bound()).unwrap();
    }
    assert_eq!(st.energy(), 0.0);
    assert!(st.field.re().iter().all(|&v| v == 1.0));
}

#[test]
fn modulus_relaxes_towards_one() {
    let s = WntStructure::euclidean();
    let dom = unit(16);
    let mut u = ComplexGridField::constant(dom, 0.5, 0.0);
    let bnd = ComplexGridField::constant(dom, 0.5, 0.0);
    u.set_boundary_from(&bnd).unwrap();
    let flow = GlFlow::new(&s, &dom, 0.05).unwrap();
    let mut st = FlowState::new(&s, u, 0.05).unwrap();
    flow.run(&mut st, flow.dt_bound(), 400).unwrap();
    let c = st.field.modulus(dom.node_index(&[8, 8]));
    assert!(c > 0.95, "{c}");
    assert!(st.energy_monotone());
}

#[test]
fn oversized_step_is_rejected() {
    let s = WntStructure::euclidean();
    let dom = unit(16);
    let st = FlowState::new(&s, ComplexGridField::constant(dom, 1.0, 0.0), 0.1).unwrap();
    let bound = cfl_bound(&s, &dom);
    assert!((bound - 0.2 / 256.0).abs() < 1e-15);
    assert!(matches!(flow_step(&s, &st, 2.0 * bound), Err(WntError::StepRejected { .. })));
    // double-phase bound still uses λmax(g⁻¹) = 1
    let dp = WntStructure::new(AnisotropyField::isotropic_double_phase(1.0, 1.0).unwrap());
    assert_eq!(cfl_bound(&dp, &dom), bound);
}

#[test]
fn centred_vortex_stays_put_and_dissipation_balances() {
    let s = WntStructure::euclidean();
    let dom = unit(64);
    let eps = 0.05;
    let u = ComplexGridField::degree_data(dom, &[([0.5, 0.5], 1)], eps);
    let flow = GlFlow::new(&s, &dom, eps).unwrap();
    let mut st = FlowState::new(&s, u, eps).unwrap();
    for _ in 0..20 {
        flow.run(&mut st, flow.dt_bound(), 25).unwrap();
        let v = detect_vortices(&st.field);
        assert_eq!(v.degrees, vec![1]);
        assert!((v.centers[0][0] - 0.5).abs() <= 1.0 / 64.0 && (v.centers[0][1] - 0.5).abs() <= 1.0 / 64.0);
    }
    assert!(st.energy_monotone());
    assert!(st.dissipation_drift() <= 0.02, "{}", st.dissipation_drift());
    assert_eq!(boundary_degree(&st.field).map(f64::round), Some(1.0));
}

#[test]
fn off_centre_pair_keeps_total_degree() {
    let s = WntStructure::euclidean();
    let dom = unit(64);
    let eps = 0.04;
    let u = ComplexGridField::degree_data(dom, &[([0.35, 0.5], 1), ([0.65, 0.52], -1)], eps);
    let flow = GlFlow::new(&s, &dom, eps).unwrap();
    let mut st = FlowState::new(&s, u, eps).unwrap();
    for _ in 0..5 {
        flow.run(&mut st, flow.dt_bound(), 40).unwrap();
        let v = detect_vortices(&st.field);
        assert_eq!(v.total_degree(), 0);
        assert_eq!(v.degrees, vec![1, -1]);
    }
    assert!(st.dissipation_drift() <= 0.02);
}

#[test]
fn relaxed_field_defects_are_confined_to_cores() {
    let s = WntStructure::euclidean();
    let dom = unit(64);
    let eps = 0.05;
    let out = relax(&s, &ComplexGridField::degree_data(dom, &[([0.5, 0.5], 1)], eps), eps, RelaxOptions::default()).unwrap();
    assert!(out.converged);
    let v = detect_vortices(&out.field);
    assert_eq!(v.len(), 1);
    assert_eq!(defect_outliers(&out.field, &v, 10.0 * eps), 0);
    assert!(out.warmup.dissipation_drift() <= 0.02);
}

#[test]
fn degree_zero_expansion_is_flat() {
    let fit = log_expansion_fit(&WntStructure::euclidean(), &unit(32), &[], &[0.1, 0.05, 0.025], RelaxOptions::default())
        .unwrap();
    assert!(fit.slope.abs() < 1e-12 && fit.intercept.abs() < 1e-12);
}

#[test]
fn degree_one_expansion_slope() {
    let fit = log_expansion_fit(
        &WntStructure::euclidean(),
        &unit(128),
        &[([0.5, 0.5], 1)],
        &[0.1, 0.05, 0.025],
        RelaxOptions::default(),
    )
    .unwrap();
    assert!(fit.excluded.is_empty());
    assert!(fit.slope >= 0.9 * PI && fit.slope <= 1.1 * PI, "{}", fit.slope);
}

#[test]
fn degree_two_expansion_slope() {
    let fit = log_expansion_fit(
        &WntStructure::euclidean(),
        &unit(128),
        &[([0.3, 0.5], 1), ([0.7, 0.5], 1)],
        &[0.1, 0.05, 0.025],
        RelaxOptions::default(),
    )
    .unwrap();
    assert!(fit.slope >= 1.8 * PI && fit.slope <= 2.2 * PI, "{}", fit.slope);
    assert!(fit.samples.iter().all(|s| s.n_vortices == 2));
}

#[test]
fn expansion_needs_three_values() {
    let err = log_expansion_fit(&WntStructure::euclidean(), &unit(16), &[], &[0.1, 0.05], RelaxOptions::default());
    assert!(err.is_err());
}

#[test]
fn double_phase_flow_dissipates() {
    let s = WntStructure::new(AnisotropyField::isotropic_double_phase(0.5, 1.0).unwrap());
    let dom = unit(32);
    let eps = 0.08;
    let u = ComplexGridField::degree_data(dom, &[([0.5, 0.5], 1)], eps);
    let flow = GlFlow::new(&s, &dom, eps).unwrap();
    let mut st = FlowState::new(&s, u, eps).unwrap();
    flow.run(&mut st, flow.dt_bound(), 200).unwrap();
    assert!(st.energy_monotone());
    assert!(st.dissipation_drift() <= 0.02);
    assert!(st.energy() < st.initial_energy());
}

#[test]
fn history_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let s = WntStructure::euclidean();
    let dom = unit(16);
    let mut st = FlowState::new(&s, ComplexGridField::degree_data(dom, &[([0.5, 0.5], 1)], 0.1), 0.1).unwrap();
    let flow = GlFlow::new(&s, &dom, 0.1).unwrap();
    flow.run(&mut st, flow.dt_bound(), 3).unwrap();
    let path = dir.path().join("h.csv");
    st.write_history_csv(&path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("step,time,energy,dissipation_increment,n_vortices\n"));
    assert_eq!(text.lines().count(), 1 + st.history.len());
}
