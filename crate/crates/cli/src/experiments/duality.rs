use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wnt_core::finsler::{check_structure, hamiltonian_oracle};
use wnt_core::linalg::{self, Vector};

use super::{fmt_row, max_of, Ctx, Outcome};
use crate::manifest::Check;
use crate::Result;

fn in_ball<const D: usize>(rng: &mut ChaCha8Rng, r: f64) -> Vector<D> {
    loop {
        let mut v = [0.0; D];
        for c in v.iter_mut() {
            *c = rng.gen_range(-r..=r);
        }
        if linalg::norm(&v) <= r {
            return v;
        }
    }
}

fn in_box<const D: usize>(rng: &mut ChaCha8Rng, extent: f64) -> Vector<D> {
    let mut v = [0.0; D];
    for c in v.iter_mut() {
        *c = rng.gen_range(0.0..=extent);
    }
    v
}

pub(super) fn run<const D: usize>(ctx: &Ctx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let sm = cfg.sampling;
    let s = cfg.anisotropy.structure::<D>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut out = Outcome::default();

    let mut rows = Vec::with_capacity(sm.samples);
    let (mut fy_max, mut rt_max) = (0.0f64, 0.0f64);
    for i in 0..sm.samples {
        let x = in_box::<D>(&mut rng, cfg.domain.extent);
        let y = in_ball::<D>(&mut rng, sm.y_max);
        let xi = s.legendre(&x, &y)?;
        let fy = (s.phi(&x, &y)? + s.hamiltonian(&x, &xi)? - linalg::dot(&xi, &y)).abs();
        let rt = linalg::norm(&linalg::sub(&s.dual_gradient(&x, &xi)?, &y));
        fy_max = fy_max.max(fy);
        rt_max = rt_max.max(rt);
        let mut vals = vec![i as f64];
        vals.extend_from_slice(&x);
        vals.extend_from_slice(&y);
        vals.extend_from_slice(&[fy, rt]);
        rows.push(fmt_row(&vals));
    }
    let axes = ["x", "y", "z"];
    let mut header = String::from("sample");
    for a in &axes[..D] {
        header.push_str(&format!(",x_{a}"));
    }
    for a in &axes[..D] {
        header.push_str(&format!(",y_{a}"));
    }
    header.push_str(",fenchel_young,round_trip");
    ctx.csv(&mut out, "duality.csv", &header, rows)?;
    out.check(Check::at_most("fenchel_young_max", fy_max, 1e-8));
    out.check(Check::at_most("round_trip_max", rt_max, 1e-8));

    let mut gaps = Vec::with_capacity(sm.oracle_points);
    let mut rows = Vec::new();
    for i in 0..sm.oracle_points {
        let x = in_box::<D>(&mut rng, cfg.domain.extent);
        let xi = in_ball::<D>(&mut rng, 3.0);
        let y = s.dual_gradient(&x, &xi)?;
        let radius = 1.5 * linalg::norm(&y) + 0.5;
        let h = s.hamiltonian(&x, &xi)?;
        let o = hamiltonian_oracle(&s, &x, &xi, radius, sm.oracle_samples)?;
        gaps.push(h - o);
        rows.push(fmt_row(&[i as f64, linalg::norm(&xi), h, o, h - o]));
    }
    ctx.csv(&mut out, "oracle.csv", "point,xi_norm,hamiltonian,oracle,gap", rows)?;
    if !gaps.is_empty() {
        out.check(Check::at_most("oracle_gap_max", max_of(gaps.iter().copied()), 1e-2));
        // the grid supremum can never exceed the true conjugate
        out.check(Check::at_least("oracle_gap_min", gaps.iter().copied().fold(f64::INFINITY, f64::min), -1e-10));
    }

    let pairs: Vec<_> = (0..sm.pairs)
        .map(|_| {
            let x = in_box::<D>(&mut rng, cfg.domain.extent);
            (x, in_ball::<D>(&mut rng, sm.y_max), in_ball::<D>(&mut rng, sm.y_max))
        })
        .collect();
    if !pairs.is_empty() {
        let rep = check_structure(&s, &pairs)?;
        out.check(Check::at_most("monotonicity_violations", rep.violations() as f64, 0.0));
        out.check(Check::at_most("growth_exponent_error", (rep.growth_exponent - rep.expected_p).abs(), 0.05));
        out.metric("growth_exponent", rep.growth_exponent);
        out.metric("dual_growth_exponent", rep.dual_growth_exponent);
        out.metric("expected_p", rep.expected_p);
        out.metric("expected_p_dual", rep.expected_p_dual);
        out.metric("strong_monotonicity", rep.strong_monotonicity);
        out.metric("dual_lipschitz", rep.dual_lipschitz);
    }
    out.metric("samples", sm.samples);
    out.metric("pairs", sm.pairs);
    out.metric("oracle_samples_per_axis", sm.oracle_samples);
    out.key("fenchel_young_max");
    Ok(out)
}
