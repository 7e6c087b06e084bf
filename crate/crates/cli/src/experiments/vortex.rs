use wnt_core::elliptic::linearize;
use wnt_core::grid::GridField;
use wnt_core::vortex2d::{run_trajectory, GreenTable, VortexConfig};

use super::{Ctx, Outcome};
use crate::manifest::Check;
use crate::Result;

pub(super) fn run(ctx: &Ctx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let s = cfg.anisotropy.structure::<2>()?;
    let dom = cfg.domain.grid::<2>()?;
    let op = linearize(&s, &GridField::zeros(dom))?;
    let table = GreenTable::new(op, cfg.solver.tol.unwrap_or(1e-12));
    let centers = cfg.vortices.iter().map(|v| v.center).collect();
    let degrees: Vec<i32> = cfg.vortices.iter().map(|v| v.degree).collect();
    let mobility = vec![cfg.physics.mobility; degrees.len()];
    let vc = VortexConfig::with_mobility(centers, degrees.clone(), mobility)?;
    let dt = cfg.schedule.dt.expect("validated");
    let traj = run_trajectory(&table, &vc, dt, cfg.schedule.steps, cfg.physics.gamma)?;
    let mut out = Outcome::default();

    let e0 = traj.energies[0];
    out.check(Check::at_most("energy_increase_max", traj.max_energy_increase().max(0.0), 1e-9 * e0.abs().max(1.0)));
    out.check(Check::at_least("recorded_states", traj.energies.len() as f64, 2.0));
    if degrees.len() == 2 {
        let sep = traj.separations();
        let ok = if degrees[0] * degrees[1] < 0 {
            sep.windows(2).all(|w| w[1] < w[0])
        } else {
            sep.windows(2).all(|w| w[1] > w[0])
        };
        out.check(Check::holds("separation_monotone", ok));
        out.metric("initial_separation", sep[0]);
        out.metric("final_separation", *sep.last().expect("at least one state"));
        out.key("separation_monotone");
    }
    out.metric("initial_energy", e0);
    out.metric("final_energy", *traj.energies.last().expect("at least one state"));
    out.metric("states", traj.energies.len());
    if let Some(h) = &traj.halt {
        out.metric("halt_time", h.time);
        out.metric("halt_reason", &h.reason);
    }
    ctx.written(&mut out, "trajectory.csv", traj.write_csv(&ctx.path("trajectory.csv")))?;
    Ok(out)
}
