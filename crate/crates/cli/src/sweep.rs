use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{parse, EpidemicConfig, SweepConfig, TargetSpec};
use crate::epidemic::{self, RunSummary};
use crate::output::{num, opt_num, sha256_hex, Artifacts};
use crate::{probe, Invocation, Outcome};

struct Plan {
    index: usize,
    beta_lock: f64,
    beta_free: f64,
    cfg: EpidemicConfig,
}

fn axis(values: &[f64], base: f64) -> Vec<f64> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

/// Grid points in `beta_lock`, `beta_free`, `i0`, `lambda` order, the last
/// axis varying fastest. Run `k` draws its random `x0` from stream `k` of
/// the seeded generator, so plans do not depend on scheduling.
fn plans(cfg: &SweepConfig, seed: u64) -> Result<Vec<Plan>> {
    let base = &cfg.base;
    match (&base.x0, cfg.random_x0) {
        (Some(_), true) => bail!("`base.x0` and `random_x0` are mutually exclusive"),
        (None, false) => bail!("`base.x0` is required unless `random_x0` is set"),
        _ => {}
    }
    let (bl0, bf0) = base.model.betas();
    let lambdas: Vec<Option<f64>> = if cfg.grid.lambda.is_empty() {
        vec![base.target.lambda]
    } else if base.target.delta_poly.is_some() {
        bail!("a `lambda` axis needs a first-order target given by `lambda`");
    } else {
        cfg.grid.lambda.iter().copied().map(Some).collect()
    };
    let dirichlet = Dirichlet::new(&vec![1.0; base.model.dim()])?;

    let mut out = Vec::new();
    for &bl in &axis(&cfg.grid.beta_lock, bl0) {
        for &bf in &axis(&cfg.grid.beta_free, bf0) {
            for &i0 in &axis(&cfg.grid.i0, base.target.i0) {
                for &lambda in &lambdas {
                    let index = out.len();
                    let model = base.model.with_betas(bl, bf);
                    let target =
                        TargetSpec { i0, lambda, delta_poly: base.target.delta_poly.clone() };
                    target.build(&model).with_context(|| format!("grid point {index}"))?;
                    let x0 = match &base.x0 {
                        Some(x0) => x0.clone(),
                        None => {
                            let mut rng = ChaCha8Rng::seed_from_u64(seed);
                            rng.set_stream(index as u64);
                            dirichlet.sample(&mut rng)
                        }
                    };
                    model.check_simplex(&x0).map_err(|e| anyhow::anyhow!("x0: {e}"))?;
                    let cfg = EpidemicConfig { model, target, x0, sim: base.sim.clone(), seed: None };
                    out.push(Plan { index, beta_lock: bl, beta_free: bf, cfg });
                }
            }
        }
    }
    Ok(out)
}

fn execute(inv: &Invocation, seed: u64, plan: &Plan) -> Result<RunSummary> {
    let dir = inv.out.join("runs").join(format!("run_{:04}", plan.index));
    let mut out = Artifacts::create(&dir)?;
    let mut config = serde_json::to_vec_pretty(&plan.cfg)?;
    config.push(b'\n');
    out.bytes("config.json", &config)?;
    let summary = epidemic::execute(&plan.cfg, &mut out, inv.format)?;
    let mut manifest = inv.manifest(seed);
    manifest.command = "epidemic";
    manifest.config_file = "config.json".into();
    manifest.config_sha256 = sha256_hex(&config);
    manifest.positive_2d_probe = false;
    manifest.run = Some(json!({
        "sweep_index": plan.index,
        "sweep_config_sha256": sha256_hex(&inv.raw),
    }));
    out.finish(manifest)?;
    Ok(summary)
}

pub fn run(inv: &Invocation) -> Result<Outcome> {
    let cfg: SweepConfig = parse(&inv.raw)?;
    let seed = inv.seed(cfg.seed);
    cfg.base.sim.resolve(None)?;
    let plans = plans(&cfg, seed)?;

    let mut out = Artifacts::create(&inv.out)?;
    out.bytes("config.json", &inv.raw)?;
    let results: Vec<Result<RunSummary>> =
        plans.par_iter().map(|p| execute(inv, seed, p)).collect();

    let header: Vec<String> = [
        "run",
        "beta_lock",
        "beta_free",
        "i0",
        "lambda",
        "termination",
        "sliding_onset",
        "convergence_time",
        "crossing_count",
        "final_abs_error",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::with_capacity(plans.len());
    for (plan, result) in plans.iter().zip(results) {
        let s = result.with_context(|| format!("run {}", plan.index))?;
        let termination = serde_json::to_value(s.termination)?;
        rows.push(vec![
            format!("run_{:04}", plan.index),
            num(plan.beta_lock),
            num(plan.beta_free),
            num(plan.cfg.target.i0),
            opt_num(plan.cfg.target.lambda),
            termination.as_str().unwrap_or_default().to_string(),
            opt_num(s.sliding_onset),
            opt_num(s.convergence_time),
            s.crossing_count.to_string(),
            num(s.final_abs_error),
        ]);
    }
    out.csv("summary.csv", &header, &rows)?;

    if inv.positive_2d_probe {
        let spec = cfg.positive_2d.clone().unwrap_or_default();
        probe::run(&spec, seed, &mut out)?;
    }
    out.finish(inv.manifest(seed))?;
    Ok(Outcome::Success)
}
