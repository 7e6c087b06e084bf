use wnt_core::elliptic::LinearizedOperator;
use wnt_core::gl_field::ComplexGridField;
use wnt_core::grid::GridField;
use wnt_core::thermal::{
    check_green_representation, heat_source, run_thermal_coupled, solve_temperature, HeatSource, ThermalCouplingOptions,
};

use super::gl::{flow_dt, vortex_list};
use super::{fmt_row, max_of, Ctx, Outcome};
use crate::manifest::Check;
use crate::Result;

fn sup(v: &[f64]) -> f64 {
    max_of(v.iter().map(|x| x.abs()))
}

pub(super) fn run(ctx: &Ctx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let p = &cfg.physics;
    let s = cfg.anisotropy.structure::<2>()?;
    let dom = cfg.domain.grid::<2>()?;
    let eps = p.eps.expect("validated");
    let tol = cfg.solver.tol.unwrap_or(1e-10);
    let vort = vortex_list(ctx);
    let init = ComplexGridField::degree_data(dom, &vort, eps);
    let opts = ThermalCouplingOptions {
        model: cfg.thermal.model,
        sigma: p.sigma,
        kappa_th: p.kappa_th,
        resolve_every: cfg.thermal.resolve_every,
        steps: cfg.schedule.steps,
        dt: flow_dt(ctx, &s, &dom, eps)?,
        tol,
    };
    let run = run_thermal_coupled(&s, &init, eps, opts)?;
    let mut out = Outcome::default();

    out.check(Check::at_most("flow_energy_drift", run.flow.dissipation_drift(), 0.02));
    out.check(Check::holds("flow_energy_monotone", run.flow.energy_monotone()));
    let mean_max = max_of(run.records.iter().map(|r| r.t_mean.abs()));
    out.check(Check::at_most("t_mean_max", mean_max, 1e-12));

    // linearity: split the initial source at x = L/2
    let op = LinearizedOperator::constant(&dom, *s.anisotropy().g_inv())?;
    let src = heat_source(opts.model, &s, &init, eps, p.sigma, p.kappa_th)?;
    let half = 0.5 * cfg.domain.extent;
    let part = |left: bool| {
        let vals = (0..dom.num_nodes())
            .map(|i| {
                let x = dom.node_position(i)[0];
                if (x < half) == left {
                    src.q().values()[i]
                } else {
                    0.0
                }
            })
            .collect();
        HeatSource::new(GridField::from_values(dom, vals)?, p.sigma, p.kappa_th)
    };
    let (q1, q2) = (part(true)?, part(false)?);
    let t = solve_temperature(&q1.superpose(&q2)?, &op, tol)?.temperature;
    let t1 = solve_temperature(&q1, &op, tol)?.temperature;
    let t2 = solve_temperature(&q2, &op, tol)?.temperature;
    let diff: Vec<f64> = (0..dom.num_nodes())
        .map(|i| t.values()[i] - t1.values()[i] - t2.values()[i])
        .collect();
    let scale = sup(t.values()).max(f64::MIN_POSITIVE);
    out.check(Check::at_most("superposition_error", sup(&diff) / scale, 10.0 * tol));
    out.metric("core_mass_fraction", src.mass_fraction_near(&vort.iter().map(|v| v.0).collect::<Vec<_>>(), 10.0 * eps));

    // point source against the Green representation on the annulus [4h, L/8]
    let res = cfg.domain.resolution;
    let pole = dom.node_index(&[res / 2; 2]);
    let (r0, r1) = (4.0 * cfg.domain.spacing(), cfg.domain.extent / 8.0);
    let sigma = if p.sigma > 0.0 { p.sigma } else { 1.0 };
    let chk = check_green_representation(&op, pole, sigma, p.kappa_th, r0, r1, tol)?;
    out.check(Check::at_most("green_profile_error", chk.profile_error, 0.05));
    out.metric("green_pointwise_error", chk.pointwise_error);
    out.metric("green_annulus_nodes", chk.nodes);

    // hot spots sit on sources
    if p.sigma > 0.0 {
        let last = heat_source(opts.model, &s, &run.flow.field, eps, p.sigma, p.kappa_th)?;
        let qbar = last.q().mean();
        let tv = run.temperature.values();
        let hottest = (0..tv.len()).fold(0, |b, i| if tv[i] > tv[b] { i } else { b });
        out.check(Check::holds("hot_spot_on_source", last.q().values()[hottest] > qbar));
    }

    let last = run.records.last().expect("final record");
    out.metric("t_min", last.t_min);
    out.metric("t_max", last.t_max);
    out.metric("max_core_drift", last.max_core_drift);
    out.metric("n_vortices", last.n_vortices);
    ctx.written(&mut out, "thermal.csv", run.write_csv(&ctx.path("thermal.csv")))?;
    ctx.written(&mut out, "temperature.csv", run.temperature.write_csv(&ctx.path("temperature.csv")))?;
    ctx.written(&mut out, "temperature.bin", run.temperature.write_binary(&ctx.path("temperature.bin")))?;
    out.artifact("temperature.json");
    ctx.written(&mut out, "history.csv", run.flow.write_history_csv(&ctx.path("history.csv")))?;
    let prof = (1..=res / 2).map(|j| {
        let i = pole + j * dom.stride(0);
        fmt_row(&[j as f64 * cfg.domain.spacing(), run.temperature.values()[i]])
    });
    ctx.csv(&mut out, "temperature_profile.csv", "r,T", prof)?;
    out.key("green_profile_error");
    Ok(out)
}
