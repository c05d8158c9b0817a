use anyhow::{bail, Context, Result};
use serde_json::json;

use smc_core::sim::{simulate_switched_linear, sliding_interval, EventKind, Trajectory};
use smc_core::synthesis::{synthesize, Controller, SynthesisError};

use crate::config::{parse, SimulateConfig};
use crate::output::Artifacts;
use crate::{Invocation, Outcome};

pub fn run(inv: &Invocation) -> Result<Outcome> {
    let cfg: SimulateConfig = parse(&inv.raw)?;
    let seed = inv.seed(cfg.seed);
    cfg.plant.validate()?;
    cfg.gains.validate()?;

    let controller: Controller<f64> =
        match (&cfg.controller, &cfg.controller_file, &cfg.synthesis) {
            (Some(c), None, None) => c.clone(),
            (None, Some(path), None) => {
                let path = inv.resolve(path);
                let bytes = std::fs::read(&path)
                    .with_context(|| format!("cannot read controller {}", path.display()))?;
                serde_json::from_slice(&bytes)
                    .with_context(|| format!("invalid controller {}", path.display()))?
            }
            (None, None, Some(s)) => {
                match synthesize(&cfg.plant, &cfg.gains, &s.delta_poly, s.setpoint, s.normalization)
                {
                    Ok((_, c)) => c,
                    Err(SynthesisError::Infeasible(report)) => {
                        let mut out = Artifacts::create(&inv.out)?;
                        out.bytes("config.json", &inv.raw)?;
                        out.json("feasibility.json", &report)?;
                        out.finish(inv.manifest(seed))?;
                        return Ok(Outcome::Negative(format!(
                            "plant is infeasible ({:?})",
                            report.failure_reason
                        )));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            _ => bail!("give exactly one of `controller`, `controller_file` or `synthesis`"),
        };
    let n = cfg.plant.dim();
    if controller.k.len() != n || controller.x_eq.len() != n {
        bail!("controller dimension {} does not match plant dimension {n}", controller.k.len());
    }

    let sim = cfg.sim.resolve(Some((&cfg.plant, &controller, &cfg.gains)))?;
    let selector = cfg.selector.build(seed)?;
    let traj = simulate_switched_linear(&cfg.plant, &controller, &cfg.gains, selector, &cfg.x0, &sim)?;

    let mut out = Artifacts::create(&inv.out)?;
    out.bytes("config.json", &inv.raw)?;
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=n).map(|i| format!("x{i}")));
    columns.extend(["gamma".to_string(), "sigma".to_string()]);
    out.series("trajectory", inv.format, &columns, &trajectory_rows(&traj))?;
    out.json("events.json", &traj.events_json())?;
    out.json("controller.json", &controller)?;
    out.json(
        "report.json",
        &json!({
            "termination": traj.termination(),
            "diagnostic": traj.diagnostic(),
            "samples": traj.len(),
            "final_time": traj.times().last(),
            "final_state": traj.final_state(),
            "surface_crossings": traj.events_of(EventKind::SurfaceCrossing).count(),
            "sliding_onset": traj.first_onset().map(|e| e.time),
            "sliding_interval": sliding_interval(&traj),
            "sim": sim,
        }),
    )?;
    out.finish(inv.manifest(seed))?;
    Ok(Outcome::Success)
}

/// `t, x..., gamma, sigma` per recorded sample.
pub fn trajectory_rows(traj: &Trajectory<f64>) -> Vec<Vec<f64>> {
    (0..traj.len())
        .map(|k| {
            let mut row = Vec::with_capacity(traj.dim() + 3);
            row.push(traj.times()[k]);
            row.extend_from_slice(traj.state(k));
            row.push(traj.gamma_trace()[k]);
            row.push(traj.sigma_trace()[k]);
            row
        })
        .collect()
}
