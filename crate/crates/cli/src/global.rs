use anyhow::{bail, Result};

use smc_core::global_analysis::{analyze, certify_vdot_negative, GlobalParams};

use crate::config::{parse, GlobalConfig};
use crate::output::Artifacts;
use crate::{Invocation, Outcome};

pub fn run(inv: &Invocation) -> Result<Outcome> {
    let cfg: GlobalConfig = parse(&inv.raw)?;
    let seed = inv.seed(cfg.seed);
    let params = match (&cfg.params, &cfg.model, &cfg.target) {
        (Some(p), None, None) => {
            if cfg.s_eval.is_some() {
                bail!("`s_eval` only applies with `model` and `target`");
            }
            p.validate()?;
            *p
        }
        (None, Some(model), Some(target)) => {
            let target = target.build(model)?;
            GlobalParams::from_model(model, &target, cfg.s_eval.unwrap_or(1.0))?
        }
        _ => bail!("give either `params` or both `model` and `target`"),
    };
    let report = analyze(&params)?;
    let certificate = cfg
        .certificate
        .as_ref()
        .map(|c| certify_vdot_negative(&params, c.grid_density, c.a_override.map(|[a, b]| (a, b))))
        .transpose()?;

    let mut out = Artifacts::create(&inv.out)?;
    out.bytes("config.json", &inv.raw)?;
    out.json("report.json", &report)?;
    let mut outcome = Outcome::Success;
    if let Some(cert) = &certificate {
        out.json("certificate.json", cert)?;
        if !cert.pass {
            outcome = Outcome::Negative(format!(
                "derivative certificate failed (max free {:e}, max lock {:e})",
                cert.max_vdot_free, cert.max_vdot_lock
            ));
        }
    }
    out.finish(inv.manifest(seed))?;
    Ok(outcome)
}
