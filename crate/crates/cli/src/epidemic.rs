use anyhow::Result;
use serde::Serialize;
use serde_json::json;

use smc_core::epidemics::{
    condition_status, condition_threshold, simulate_epidemic, ControlTarget, EpidemicModel,
    EpidemicRun,
};
use smc_core::sim::{EventKind, Termination};

use crate::config::{parse, EpidemicConfig};
use crate::output::Artifacts;
use crate::simulate::trajectory_rows;
use crate::{Format, Invocation, Outcome};

/// Band around `I0` used for the convergence time.
pub const CONVERGENCE_BAND: f64 = 0.02;

/// The numbers a sweep keeps from one epidemic run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub termination: Termination,
    pub sliding_onset: Option<f64>,
    /// First recorded time at or after onset with `|I - I0| <= 0.02 I0`.
    pub convergence_time: Option<f64>,
    pub crossing_count: usize,
    pub final_abs_error: f64,
}

pub fn summarize(
    model: &EpidemicModel<f64>,
    target: &ControlTarget<f64>,
    run: &EpidemicRun<f64>,
) -> RunSummary {
    let traj = &run.trajectory;
    let ii = model.i_index();
    let onset = traj.first_onset().map(|e| e.time);
    let convergence_time = onset.and_then(|t_on| {
        traj.times()
            .iter()
            .zip(traj.component(ii))
            .find(|&(&t, i)| t >= t_on && (i - target.i0).abs() <= CONVERGENCE_BAND * target.i0)
            .map(|(&t, _)| t)
    });
    RunSummary {
        termination: traj.termination(),
        sliding_onset: onset,
        convergence_time,
        crossing_count: traj.events_of(EventKind::SurfaceCrossing).count(),
        final_abs_error: (traj.final_state()[ii] - target.i0).abs(),
    }
}

/// Runs one epidemic simulation and writes its artifacts (without manifest).
pub fn execute(
    cfg: &EpidemicConfig,
    out: &mut Artifacts,
    format: Format,
) -> Result<RunSummary> {
    let target = cfg.target.build(&cfg.model)?;
    let sim = cfg.sim.resolve(None)?;
    let run = simulate_epidemic(&cfg.model, &target, &cfg.x0, &sim)?;
    let summary = summarize(&cfg.model, &target, &run);
    let traj = &run.trajectory;

    let mut columns = vec!["t".to_string()];
    columns.extend(cfg.model.compartments().iter().map(|c| c.to_string()));
    columns.extend(["gamma".to_string(), "sigma".to_string()]);
    out.series("compartments", format, &columns, &trajectory_rows(traj))?;
    out.json("events.json", &traj.events_json())?;
    let changes: Vec<_> = run
        .status_changes()
        .into_iter()
        .map(|(t, s)| json!({ "time": t, "status": s }))
        .collect();
    out.json("status.json", &json!({ "status_changes": changes }))?;
    out.json("controller.json", &run.controller)?;
    out.json(
        "report.json",
        &json!({
            "model": cfg.model.name(),
            "i0": target.i0,
            "delta_poly": target.delta_poly,
            "condition_threshold": condition_threshold(&cfg.model),
            "initial_status": condition_status(&cfg.model, cfg.x0[0]),
            "termination": summary.termination,
            "diagnostic": traj.diagnostic(),
            "samples": traj.len(),
            "sliding_onset": summary.sliding_onset,
            "endgame_time": run.endgame_time,
            "convergence_time": summary.convergence_time,
            "crossing_count": summary.crossing_count,
            "final_state": traj.final_state(),
            "final_abs_error": summary.final_abs_error,
            "sim": sim,
        }),
    )?;
    Ok(summary)
}

pub fn run(inv: &Invocation) -> Result<Outcome> {
    let cfg: EpidemicConfig = parse(&inv.raw)?;
    let seed = inv.seed(cfg.seed);
    // Validate before anything touches the output directory.
    cfg.target.build(&cfg.model)?;
    cfg.sim.resolve(None)?;
    cfg.model.check_simplex(&cfg.x0).map_err(|e| anyhow::anyhow!("x0: {e}"))?;
    let mut out = Artifacts::create(&inv.out)?;
    out.bytes("config.json", &inv.raw)?;
    execute(&cfg, &mut out, inv.format)?;
    out.finish(inv.manifest(seed))?;
    Ok(Outcome::Success)
}
