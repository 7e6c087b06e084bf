use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wnt_core::elliptic::{check_coulomb, check_log_defect, green_kernel, linearize, reciprocity, LinearizedOperator};
use wnt_core::grid::{GridDomain, GridField};

use super::{fmt_row, Ctx, Outcome};
use crate::manifest::Check;
use crate::Result;

struct Kernel<const D: usize> {
    dom: GridDomain<D>,
    op: LinearizedOperator<D>,
    pole: usize,
    green: GridField<D>,
    tol: f64,
}

fn kernel<const D: usize>(ctx: &Ctx) -> Result<Kernel<D>> {
    let cfg = ctx.cfg;
    let s = cfg.anisotropy.structure::<D>()?;
    let dom = cfg.domain.grid::<D>()?;
    // the vacuum linearization D²H(x, 0)
    let op = linearize(&s, &GridField::zeros(dom))?;
    let pole = dom.node_index(&[cfg.domain.resolution / 2; D]);
    let tol = cfg.solver.tol.unwrap_or(1e-10);
    let green = green_kernel(&op, pole, tol)?;
    Ok(Kernel { dom, op, pole, green, tol })
}

/// Reciprocity against random interior nodes, positivity, and the axis profile.
fn common<const D: usize>(ctx: &Ctx, k: &Kernel<D>, out: &mut Outcome, profile: impl Fn(f64, f64) -> f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let interior = k.dom.interior_nodes();
    let pairs: Vec<(usize, usize)> = (0..ctx.cfg.sampling.reciprocity_pairs)
        .map(|_| (k.pole, interior[rng.gen_range(0..interior.len())]))
        .collect();
    if !pairs.is_empty() {
        let r = reciprocity(&k.op, &pairs, k.tol)?;
        out.check(Check::at_most("reciprocity", r, 1e-6));
    }
    let min = k.green.values().iter().copied().fold(f64::INFINITY, f64::min);
    out.check(Check::at_least("green_min", min, -1e-12));

    let h = k.dom.spacing()[0];
    let res = ctx.cfg.domain.resolution;
    let rows = (1..=res / 2).map(|j| {
        let r = j as f64 * h;
        let g = k.green.values()[k.pole + j * k.dom.stride(0)];
        fmt_row(&[r, g, profile(r, g)])
    });
    ctx.csv(out, "profile.csv", "r,G,normalized", rows)
}

fn annulus(ctx: &Ctx) -> (f64, f64) {
    (4.0 * ctx.cfg.domain.spacing(), ctx.cfg.domain.extent / 8.0)
}

pub(super) fn run_3d(ctx: &Ctx) -> Result<Outcome> {
    let k = kernel::<3>(ctx)?;
    let mut out = Outcome::default();
    let (r0, r1) = annulus(ctx);
    let chk = check_coulomb(&k.op, &k.green, k.pole, r0, r1)?;
    if ctx.cfg.anisotropy.is_euclidean() {
        out.check(Check::within("coulomb_ratio_min", chk.min_ratio, 0.9, 1.1));
        out.check(Check::within("coulomb_ratio_max", chk.max_ratio, 0.9, 1.1));
    } else {
        // only two-sided boundedness is expected away from the Euclidean case
        out.check(Check::within("coulomb_ratio_min", chk.min_ratio, 0.25, 4.0));
        out.check(Check::within("coulomb_ratio_max", chk.max_ratio, 0.25, 4.0));
    }
    out.metric("annulus", [r0, r1]);
    out.metric("annulus_nodes", chk.nodes);
    out.metric("coulomb_fit_c", chk.fit_c);
    out.metric("coulomb_fit_b", chk.fit_b);
    common(ctx, &k, &mut out, |r, g| 4.0 * PI * r * g)?;
    out.key("coulomb_ratio_min");
    Ok(out)
}

pub(super) fn run_2d(ctx: &Ctx) -> Result<Outcome> {
    let k = kernel::<2>(ctx)?;
    let mut out = Outcome::default();
    let (r0, r1) = annulus(ctx);
    let chk = check_log_defect(&k.op, &k.green, k.pole, r0, r1)?;
    out.check(Check::at_most("log_defect_variation", chk.variation, 0.2));
    out.metric("annulus", [r0, r1]);
    out.metric("annulus_nodes", chk.nodes);
    out.metric("log_defect_mean", chk.mean);
    common(ctx, &k, &mut out, |r, g| g + r.ln() / (2.0 * PI))?;
    out.key("log_defect_variation");
    Ok(out)
}
