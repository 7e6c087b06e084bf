use wnt_core::elliptic::LinearizedOperator;
use wnt_core::finsler::least_squares;
use wnt_core::grid::GridDomain;
use wnt_core::vortex2d::*;
use wnt_core::WntError;

fn table(n: usize) -> GreenTable {
    GreenTable::new(LinearizedOperator::laplacian(&GridDomain::<2>::unit(n).unwrap()), 1e-12)
}

fn pair(d1: i32, d2: i32, r: f64) -> VortexConfig {
    VortexConfig::new(vec![[0.5 - r / 2.0, 0.5], [0.5 + r / 2.0, 0.5]], vec![d1, d2]).unwrap()
}

#[test]
fn single_vortex_has_no_interaction() {
    let t = table(32);
    let cfg = VortexConfig::new(vec![[0.5, 0.5]], vec![1]).unwrap();
    assert_eq!(renormalized_energy(&t, &cfg, 0.0).unwrap(), 0.0);
    assert_eq!(renormalized_energy(&t, &cfg, 0.7).unwrap(), 0.7);
    assert_eq!(force(&t, &cfg, 0).unwrap(), [0.0, 0.0]);
    let next = step_vortices(&t, &cfg, 1e-3).unwrap();
    assert!((next.centers[0][0] - 0.5).abs() < 1e-10 && (next.centers[0][1] - 0.5).abs() < 1e-10);
}

#[test]
fn opposite_pair_energy_grows_with_distance() {
    let t = table(64);
    let e: Vec<f64> = [0.1, 0.2, 0.3].iter().map(|&r| renormalized_energy(&t, &pair(1, -1, r), 0.0).unwrap()).collect();
    assert!(e[0] < e[1] && e[1] < e[2], "{e:?}");
}

#[test]
fn relabelling_leaves_energy_unchanged() {
    let t = table(64);
    let a = VortexConfig::new(vec![[0.3, 0.4], [0.6, 0.7], [0.71, 0.3]], vec![1, -1, 2]).unwrap();
    let b = VortexConfig::new(vec![[0.71, 0.3], [0.3, 0.4], [0.6, 0.7]], vec![2, 1, -1]).unwrap();
    let (ea, eb) = (renormalized_energy(&t, &a, 0.0).unwrap(), renormalized_energy(&t, &b, 0.0).unwrap());
    assert!((ea - eb).abs() <= 1e-12 * ea.abs());
}

#[test]
fn force_signs() {
    let t = table(64);
    let same = pair(1, 1, 0.25);
    let (f0, f1) = (force(&t, &same, 0).unwrap(), force(&t, &same, 1).unwrap());
    assert!(f0[0] < 0.0 && f1[0] > 0.0, "same sign repels: {f0:?} {f1:?}");
    assert!((f0[0] + f1[0]).abs() < 1e-8 * f0[0].abs() && f0[1].abs() < 1e-8 * f0[0].abs());
    let opp = pair(1, -1, 0.25);
    let (g0, g1) = (force(&t, &opp, 0).unwrap(), force(&t, &opp, 1).unwrap());
    assert!(g0[0] > 0.0 && g1[0] < 0.0, "opposite signs attract: {g0:?} {g1:?}");
}

#[test]
fn too_tight_configurations_are_refused() {
    let t = table(32);
    let close = pair(1, -1, 2.0 / 32.0);
    assert!(matches!(renormalized_energy(&t, &close, 0.0), Err(WntError::ConfigurationTooTight(_))));
    let near_wall = VortexConfig::new(vec![[0.05, 0.5]], vec![1]).unwrap();
    assert!(matches!(renormalized_energy(&t, &near_wall, 0.0), Err(WntError::ConfigurationTooTight(_))));
}

#[test]
fn opposite_pair_closes_until_collision() {
    let t = table(64);
    let traj = run_trajectory(&t, &pair(1, -1, 0.3), 2e-4, 2000, 0.0).unwrap();
    let sep = traj.separations();
    assert!(sep.windows(2).all(|w| w[1] < w[0]));
    let halt = traj.halt.as_ref().expect("collision halt");
    assert!(halt.reason.contains("collision"), "{}", halt.reason);
    assert!(traj.max_energy_increase() <= 1e-9);
}

#[test]
fn same_sign_pair_separates() {
    let t = table(64);
    let traj = run_trajectory(&t, &pair(1, 1, 0.2), 2e-4, 100, 0.0).unwrap();
    let sep = traj.separations();
    assert!(sep.len() > 10);
    assert!(sep.windows(2).all(|w| w[1] > w[0]));
    assert!(traj.max_energy_increase() <= 1e-9);
}

#[test]
fn rk4_converges_at_fourth_order() {
    // the run stays inside one cell, where the interpolated kernel is smooth
    let t = table(32);
    let h = 1.0 / 32.0;
    let cfg = VortexConfig::new(vec![[0.35 + 0.3 * h, 0.5 + 0.2 * h], [0.65 + 0.3 * h, 0.5 + 0.6 * h]], vec![1, 1]).unwrap();
    let total = 5e-4;
    let finals: Vec<VortexConfig> = [2usize, 4, 8]
        .iter()
        .map(|&n| {
            let mut c = cfg.clone();
            for _ in 0..n {
                c = step_vortices(&t, &c, total / n as f64).unwrap();
            }
            c
        })
        .collect();
    let d = |a: &VortexConfig, b: &VortexConfig| {
        (0..2).map(|i| (a.centers[i][0] - b.centers[i][0]).hypot(a.centers[i][1] - b.centers[i][1])).fold(0.0, f64::max)
    };
    assert!(d(&cfg, &finals[2]) < h);
    let ratio = d(&finals[0], &finals[1]) / d(&finals[1], &finals[2]);
    assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
}

#[test]
fn pair_force_scales_inversely_with_distance() {
    let dom = GridDomain::<2>::new([4.0, 4.0], [256, 256]).unwrap();
    let t = GreenTable::new(LinearizedOperator::laplacian(&dom), 1e-12);
    let rs = [0.125, 0.1875, 0.25, 0.3125, 0.375];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in rs {
        let cfg = VortexConfig::new(vec![[2.0 - r / 2.0, 2.0], [2.0 + r / 2.0, 2.0]], vec![1, -1]).unwrap();
        let f = force(&t, &cfg, 0).unwrap();
        xs.push(r.ln());
        ys.push(f[0].hypot(f[1]).ln());
    }
    let (slope, _) = least_squares(&xs, &ys);
    assert!((slope + 1.0).abs() <= 0.15, "{slope}");
}

#[test]
fn translation_equivariance() {
    let a = GreenTable::new(LinearizedOperator::laplacian(&GridDomain::<2>::unit(64).unwrap()), 1e-12);
    let shifted = GridDomain::<2>::with_origin([3.0, -2.0], [1.0, 1.0], [64, 64]).unwrap();
    let b = GreenTable::new(LinearizedOperator::laplacian(&shifted), 1e-12);
    let c1 = VortexConfig::new(vec![[0.4, 0.45], [0.63, 0.58]], vec![1, -1]).unwrap();
    let c2 = VortexConfig::new(vec![[3.4, -1.55], [3.63, -1.42]], vec![1, -1]).unwrap();
    for i in 0..2 {
        let (f1, f2) = (force(&a, &c1, i).unwrap(), force(&b, &c2, i).unwrap());
        assert!((f1[0] - f2[0]).abs() < 1e-6 * f1[0].abs().max(1.0) && (f1[1] - f2[1]).abs() < 1e-6 * f1[0].abs().max(1.0));
    }
}

#[test]
fn trajectory_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let t = table(32);
    let traj = run_trajectory(&t, &pair(1, 1, 0.3), 1e-4, 3, 0.0).unwrap();
    let p = dir.path().join("traj.csv");
    traj.write_csv(&p).unwrap();
    let text = std::fs::read_to_string(p).unwrap();
    assert!(text.starts_with("time,i,x_i,y_i,d_i,W,force_norm\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}
