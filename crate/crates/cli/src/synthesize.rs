use anyhow::Result;

use smc_core::synthesis::{synthesize, SynthesisError};

use crate::config::{parse, SynthesizeConfig};
use crate::output::Artifacts;
use crate::{Invocation, Outcome};

/// Writes `feasibility.json` always and `controller.json` when feasible.
pub fn run(inv: &Invocation) -> Result<Outcome> {
    let cfg: SynthesizeConfig = parse(&inv.raw)?;
    let seed = inv.seed(cfg.seed);
    let result =
        synthesize(&cfg.plant, &cfg.gains, &cfg.delta_poly, cfg.setpoint, cfg.normalization);
    let mut out = Artifacts::create(&inv.out)?;
    out.bytes("config.json", &inv.raw)?;
    let outcome = match result {
        Ok((report, controller)) => {
            out.json("feasibility.json", &report)?;
            out.json("controller.json", &controller)?;
            Outcome::Success
        }
        Err(SynthesisError::Infeasible(report)) => {
            out.json("feasibility.json", &report)?;
            Outcome::Negative(format!("plant is infeasible ({:?})", report.failure_reason))
        }
        Err(e) => return Err(e.into()),
    };
    out.finish(inv.manifest(seed))?;
    Ok(outcome)
}
