use std::f64::consts::PI;

use wnt_core::finsler::WntStructure;
use wnt_core::gl_field::{
    detect_vortices, log_expansion_fit, modica_mortola_c0, relax as relax_field, ComplexGridField, GlFlow, RelaxOptions,
};
use wnt_core::grid::GridDomain;
use wnt_core::linalg::Vector;

use super::{fmt_row, max_of, Ctx, Outcome};
use crate::manifest::Check;
use crate::Result;

pub(super) fn vortex_list(ctx: &Ctx) -> Vec<(Vector<2>, i32)> {
    ctx.cfg.vortices.iter().map(|v| (v.center, v.degree)).collect()
}

/// Flow step from the schedule: absolute, or a fraction of the stability bound.
pub(super) fn flow_dt(ctx: &Ctx, s: &WntStructure<2>, dom: &GridDomain<2>, eps: f64) -> Result<Option<f64>> {
    let sch = &ctx.cfg.schedule;
    Ok(match (sch.dt, sch.dt_fraction) {
        (Some(dt), _) => Some(dt),
        (None, Some(f)) => Some(f * GlFlow::new(s, dom, eps)?.dt_bound()),
        (None, None) => None,
    })
}

fn relax_options(ctx: &Ctx, dt: Option<f64>) -> RelaxOptions {
    let mut opts = RelaxOptions {
        warmup_steps: ctx.cfg.schedule.steps,
        dt,
        ..RelaxOptions::default()
    };
    if let Some(m) = ctx.cfg.solver.max_iter {
        opts.max_iter = m;
    }
    opts
}

pub(super) fn relax(ctx: &Ctx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let s = cfg.anisotropy.structure::<2>()?;
    let dom = cfg.domain.grid::<2>()?;
    let eps = cfg.physics.eps.expect("validated");
    let vort = vortex_list(ctx);
    let init = ComplexGridField::degree_data(dom, &vort, eps);
    let res = relax_field(&s, &init, eps, relax_options(ctx, flow_dt(ctx, &s, &dom, eps)?))?;
    let mut out = Outcome::default();

    let found = detect_vortices(&res.field);
    let expected: i32 = vort.iter().map(|v| v.1).sum();
    out.check(Check::at_most("flow_energy_drift", res.warmup.dissipation_drift(), 0.02));
    out.check(Check::holds("flow_energy_monotone", res.warmup.energy_monotone()));
    out.check(Check::holds("relaxation_converged", res.converged));
    out.check(Check::holds("degree_conserved", found.total_degree() == expected));
    let c0 = modica_mortola_c0();
    let exact = 2.0 * 2f64.sqrt() / 3.0;
    out.check(Check::at_most("modica_mortola_error", (c0 - exact).abs(), 1e-6));
    out.metric("modica_mortola_c0", c0);
    out.metric("energy", res.energy);
    out.metric("stationarity", res.stationarity);
    out.metric("iterations", res.iterations);
    out.metric("flow_rejected_steps", res.warmup.rejected);
    out.metric("flow_drift_of_decrease", res.warmup.dissipation_drift_of_decrease());

    ctx.written(&mut out, "history.csv", res.warmup.write_history_csv(&ctx.path("history.csv")))?;
    let rows = found
        .centers
        .iter()
        .zip(&found.degrees)
        .map(|(c, d)| format!("{},{d}", fmt_row(c)));
    ctx.csv(&mut out, "vortices.csv", "x,y,degree", rows)?;
    ctx.written(&mut out, "modulus.csv", res.field.modulus_field().write_csv(&ctx.path("modulus.csv")))?;
    ctx.written(&mut out, "field.bin", res.field.write_binary(&ctx.path("field.bin")))?;
    out.artifact("field.json");
    out.key("flow_energy_drift");
    Ok(out)
}

pub(super) fn log_expansion(ctx: &Ctx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let s = cfg.anisotropy.structure::<2>()?;
    let dom = cfg.domain.grid::<2>()?;
    let vort = vortex_list(ctx);
    let eps_list = &cfg.physics.eps_list;
    // the stability bound depends on ε, so only an absolute step is taken from the schedule
    let fit = log_expansion_fit(&s, &dom, &vort, eps_list, relax_options(ctx, cfg.schedule.dt))?;
    let mut out = Outcome::default();

    let n = cfg.total_degree_abs() as f64;
    if n > 0.0 {
        out.check(Check::within("slope", fit.slope, 0.9 * PI * n, 1.1 * PI * n));
    } else {
        out.check(Check::within("slope", fit.slope, -0.05, 0.05));
    }
    out.check(Check::holds("all_converged", fit.excluded.is_empty()));
    out.check(Check::at_most("flow_energy_drift", max_of(fit.samples.iter().map(|s| s.flow_drift)), 0.02));
    out.check(Check::holds("flow_energy_monotone", fit.samples.iter().all(|s| s.flow_monotone)));
    out.check(Check::holds("vortex_count", fit.samples.iter().all(|s| s.n_vortices == vort.len())));
    out.metric("slope", fit.slope);
    out.metric("slope_over_pi", fit.slope / PI);
    out.metric("intercept", fit.intercept);
    out.metric("excluded", &fit.excluded);

    let rows = fit.samples.iter().map(|s| {
        format!(
            "{},{},{},{}",
            fmt_row(&[s.eps, s.eps.ln().abs(), s.energy]),
            s.converged,
            fmt_row(&[s.stationarity, s.flow_drift]),
            s.n_vortices
        )
    });
    ctx.csv(
        &mut out,
        "expansion.csv",
        "eps,abs_log_eps,energy,converged,stationarity,flow_drift,n_vortices",
        rows,
    )?;
    out.key("slope");
    Ok(out)
}
