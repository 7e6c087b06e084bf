use wnt_core::elliptic::LinearizedOperator;
use wnt_core::finsler::WntStructure;
use wnt_core::gl_field::{detect_vortices, relax, ComplexGridField, RelaxOptions};
use wnt_core::grid::{GridDomain, GridField};
use wnt_core::thermal::*;

fn unit(n: usize) -> GridDomain<2> {
    GridDomain::<2>::unit(n).unwrap()
}

const TOL: f64 = 1e-11;

#[test]
fn constant_fields_give_trivial_sources() {
    let dom = unit(16);
    let q1 = heat_source_from_field(&ComplexGridField::constant(dom, 1.0, 0.0), 0.1, 1.0, 1.0).unwrap();
    assert!(q1.q().values().iter().all(|&v| v == 0.0));
    let q0 = heat_source_from_field(&ComplexGridField::constant(dom, 0.0, 0.0), 0.1, 1.0, 1.0).unwrap();
    assert!(q0.q().values().iter().all(|&v| (v - 25.0).abs() < 1e-12));
    assert!(heat_source_from_field(&ComplexGridField::constant(dom, 0.0, 0.0), 0.0, 1.0, 1.0).is_err());
}

#[test]
fn relaxed_vortex_heat_sits_in_the_core() {
    let s = WntStructure::euclidean();
    let dom = unit(128);
    let eps = 0.025;
    let init = ComplexGridField::degree_data(dom, &[([0.5, 0.5], 1)], eps);
    let u = relax(&s, &init, eps, RelaxOptions::default()).unwrap().field;
    let v = detect_vortices(&u);
    assert_eq!(v.len(), 1);
    for model in [HeatModel::Potential, HeatModel::EnergyDensity] {
        let src = heat_source(model, &s, &u, eps, 1.0, 1.0).unwrap();
        assert!(src.total_mass().is_finite());
        if model == HeatModel::Potential {
            let frac = src.mass_fraction_near(&v.centers, 10.0 * eps);
            assert!(frac >= 0.9, "core fraction {frac}");
        }
    }
}

#[test]
fn constant_source_gives_zero_temperature() {
    let dom = unit(32);
    let src = HeatSource::new(GridField::from_fn(dom, |_| 3.0), 1.0, 1.0).unwrap();
    let t = solve_temperature(&src, &LinearizedOperator::laplacian(&dom), TOL).unwrap();
    assert!(t.temperature.values().iter().all(|v| v.abs() < 1e-12));
}

fn bump(dom: GridDomain<2>, c: [f64; 2], w: f64) -> GridField<2> {
    GridField::from_fn(dom, |p| (-((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / w).exp())
}

#[test]
fn temperature_is_linear_and_mean_zero() {
    let dom = unit(48);
    let op = LinearizedOperator::laplacian(&dom);
    let a = HeatSource::new(bump(dom, [0.3, 0.4], 0.01), 0.7, 1.3).unwrap();
    let b = HeatSource::new(bump(dom, [0.7, 0.6], 0.02), 0.7, 1.3).unwrap();
    let ta = solve_temperature(&a, &op, TOL).unwrap().temperature;
    let tb = solve_temperature(&b, &op, TOL).unwrap().temperature;
    let tab = solve_temperature(&a.superpose(&b).unwrap(), &op, TOL).unwrap().temperature;
    let scale = tab.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..dom.num_nodes() {
        assert!((tab.values()[i] - ta.values()[i] - tb.values()[i]).abs() <= 1e-8 * scale);
    }
    for t in [&ta, &tb, &tab] {
        assert!(t.mean().abs() <= 1e-12);
    }
    let t2 = solve_temperature(&a.with_sigma(1.4).unwrap(), &op, TOL).unwrap().temperature;
    for i in 0..dom.num_nodes() {
        assert!((t2.values()[i] - 2.0 * ta.values()[i]).abs() <= 1e-9 * scale);
    }
}

#[test]
fn hot_spot_lies_on_the_source() {
    let dom = unit(48);
    let src = HeatSource::new(bump(dom, [0.35, 0.6], 0.005), 1.0, 1.0).unwrap();
    let t = solve_temperature(&src, &LinearizedOperator::laplacian(&dom), TOL).unwrap().temperature;
    let (imax, _) = t
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    assert!(src.q().values()[imax] > src.q().mean());
}

#[test]
fn point_source_matches_green_representation() {
    let dom = unit(128);
    let op = LinearizedOperator::laplacian(&dom);
    let pole = dom.node_index(&[64, 64]);
    let chk = check_green_representation(&op, pole, 2.0, 0.5, 4.0 / 128.0, 1.0 / 8.0, TOL).unwrap();
    assert!(chk.nodes > 100, "{chk:?}");
    assert!(chk.profile_error <= 0.05, "{chk:?}");
}

#[test]
fn drift_of_simple_temperatures() {
    let dom = unit(64);
    let zero = thermal_drift_field(&GridField::zeros(dom), 1.0, 1.0).unwrap();
    assert!(zero.iter().all(|v| *v == [0.0, 0.0]));

    let ramp = GridField::from_fn(dom, |p| 0.3 * p[0] - 0.2 * p[1]);
    for v in thermal_drift_field(&ramp, 2.0, 4.0).unwrap() {
        assert!((v[0] - 0.15).abs() < 1e-12 && (v[1] + 0.1).abs() < 1e-12);
    }

    let c = [0.5, 0.5];
    let radial = bump(dom, c, 0.04);
    let drift = thermal_drift_field(&radial, 1.0, 1.0).unwrap();
    let (mut ang, mut rad) = (0.0, 0.0);
    for (i, v) in drift.iter().enumerate() {
        if dom.is_boundary(i) {
            continue;
        }
        let p = dom.node_position(i);
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        let r = dx.hypot(dy);
        if r == 0.0 {
            continue;
        }
        rad += ((v[0] * dx + v[1] * dy) / r).abs();
        ang += ((-v[0] * dy + v[1] * dx) / r).abs();
    }
    assert!(ang < 0.02 * rad, "{ang} vs {rad}");
}

#[test]
fn negative_sources_are_rejected() {
    let dom = unit(8);
    assert!(HeatSource::new(GridField::from_fn(dom, |p| p[0] - 0.5), 1.0, 1.0).is_err());
    assert!(HeatSource::new(GridField::zeros(dom), 1.0, 0.0).is_err());
}

#[test]
fn coupled_run_resolves_periodically() {
    let s = WntStructure::euclidean();
    let dom = unit(48);
    let eps = 0.05;
    let init = ComplexGridField::degree_data(dom, &[([0.4, 0.5], 1)], eps);
    let opts = ThermalCouplingOptions {
        steps: 30,
        ..Default::default()
    };
    let run = run_thermal_coupled(&s, &init, eps, opts).unwrap();
    let steps: Vec<usize> = run.records.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![0, 10, 20, 30]);
    assert!(run.records.iter().all(|r| r.t_mean.abs() <= 1e-12 && r.t_max > 0.0));
    assert!(run.records.windows(2).all(|w| w[1].energy <= w[0].energy));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("thermal.csv");
    run.write_csv(&p).unwrap();
    assert_eq!(std::fs::read_to_string(p).unwrap().lines().count(), 5);
}
