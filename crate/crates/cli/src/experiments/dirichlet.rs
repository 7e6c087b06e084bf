use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wnt_core::elliptic::{dirichlet_residual, solve_dirichlet, DirichletOptions};
use wnt_core::finsler::ScalarProfile;
use wnt_core::grid::GridField;

use super::{fmt_row, max_of, non_increasing, Ctx, Outcome};
use crate::manifest::Check;
use crate::Result;

/// Centre value of `−Δu = 1` on the unit square with zero boundary data,
/// summed from the double sine series over odd `m, n < terms`.
pub fn poisson_centre_series() -> f64 {
    let terms = 2000;
    let mut sum = 0.0;
    for m in (1..terms).step_by(2) {
        for n in (1..terms).step_by(2) {
            let sign = if ((m + n) / 2) % 2 == 1 { 1.0 } else { -1.0 };
            let (mf, nf) = (m as f64, n as f64);
            sum += sign / (mf * nf * (mf * mf + nf * nf));
        }
    }
    16.0 / PI.powi(4) * sum
}

pub(super) fn run<const D: usize>(ctx: &Ctx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let s = cfg.anisotropy.structure::<D>()?;
    let dom = cfg.domain.grid::<D>()?;
    let dc = &cfg.dirichlet;
    let f = GridField::from_fn(dom, |p| dc.source.eval(p));
    let bnd = GridField::from_fn(dom, |p| dc.boundary.eval(p));
    let mut opts = DirichletOptions::for_dim(D);
    if let Some(t) = cfg.solver.tol {
        opts.tol = t;
    }
    if let Some(m) = cfg.solver.max_iter {
        opts.max_iter = m;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut out = Outcome::default();
    let mut sols = Vec::new();
    let mut history_rows = Vec::new();
    let mut monotone = true;
    for k in 0..dc.initializations {
        let init = if k == 0 {
            None
        } else {
            let vals = (0..dom.num_nodes()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            Some(GridField::from_values(dom, vals)?)
        };
        let sol = solve_dirichlet(&s, &f, &bnd, init.as_ref(), opts)?;
        monotone &= non_increasing(&sol.energy_history, 1e-12);
        for (it, e) in sol.energy_history.iter().enumerate() {
            history_rows.push(format!("{k},{it},{}", fmt_row(&[*e])));
        }
        let strong = dirichlet_residual(&s, &f, &sol.u)?;
        sols.push((sol, strong));
    }
    ctx.csv(&mut out, "energy_history.csv", "initialization,iteration,energy", history_rows)?;
    let first = &sols[0].0;
    ctx.written(&mut out, "solution.csv", first.u.write_csv(&ctx.path("solution.csv")))?;
    ctx.written(&mut out, "solution.bin", first.u.write_binary(&ctx.path("solution.bin")))?;
    out.artifact("solution.json");

    out.check(Check::at_most("residual_max", max_of(sols.iter().map(|(_, r)| *r)), opts.tol));
    out.check(Check::holds("energy_monotone", monotone));
    if sols.len() > 1 {
        let spread = max_of(sols[1..].iter().map(|(s, _)| s.u.sup_distance(&first.u).unwrap_or(f64::INFINITY)));
        out.check(Check::at_most("uniqueness_spread", spread, 10.0 * opts.tol));
        out.key("uniqueness_spread");
    }
    out.metric("iterations", sols.iter().map(|(s, _)| s.iterations).collect::<Vec<_>>());

    // Poisson on a square with constant load: compare with the series
    let res = cfg.domain.resolution;
    if let (2, true, ScalarProfile::Constant { value: c }, true) =
        (D, cfg.anisotropy.is_euclidean(), &dc.source, dc.boundary.is_identically_zero())
    {
        if res.is_multiple_of(2) {
            let mid = [res / 2; D];
            let centre = first.u.get(&mid);
            let l = cfg.domain.extent;
            let exact = c * l * l * poisson_centre_series();
            let h = cfg.domain.spacing();
            out.metric("centre_value", centre);
            out.metric("centre_oracle", exact);
            out.check(Check::at_most("centre_value_error", (centre - exact).abs(), 2.0 * h * h * c.abs()));
            out.key("centre_value_error");
        }
    }
    Ok(out)
}
