//! Probe of global convergence for random positive controllable 2-D plants.
//!
//! A plant is positive when `F` is Metzler and `g`, `H` are nonnegative;
//! with nonnegative gains `F + gH gamma` is then Metzler too and the
//! nonnegative orthant is invariant. Each sample starts anywhere in the
//! box `[0, 3 x_eq]` and counts as converged when it ends near `x_eq`.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use smc_core::linalg::{norm2, Matrix, Poly};
use smc_core::sim::{simulate_switched_linear, EventKind, SimConfig, Termination};
use smc_core::synthesis::{
    check_feasibility, synthesize, Controller, GainIntervals, GainSelector, Plant,
    SelectionPolicy, XeqNormalization,
};

use crate::config::ProbeSpec;
use crate::output::{num, opt_num, Artifacts};

const MAX_DRAWS: usize = 100_000;

/// Random streams from here up belong to the probe; sweep runs use the low ones.
const STREAM_BASE: u64 = 1 << 63;

struct Sample {
    plant: Plant<f64>,
    gains: GainIntervals<f64>,
    lambda: f64,
    controller: Controller<f64>,
    x0: Vec<f64>,
}

fn draw(rng: &mut ChaCha8Rng) -> Result<Sample> {
    for _ in 0..MAX_DRAWS {
        let f = Matrix::from_fn(2, 2, |i, j| {
            if i == j {
                rng.gen_range(-1.0..0.5)
            } else {
                rng.gen_range(0.0..1.0)
            }
        });
        let g = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let h = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let lo = rng.gen_range(0.0..1.0);
        let i1_hi = lo + rng.gen_range(0.1..1.0);
        let i2_lo = i1_hi + rng.gen_range(0.2..2.0);
        let i2_hi = i2_lo + rng.gen_range(0.1..1.0);
        let lambda = rng.gen_range(0.5..2.0);
        let Ok(plant) = Plant::new(f, g, h) else { continue };
        let Ok(gains) = GainIntervals::new(lo, i1_hi, i2_lo, i2_hi) else { continue };
        if !check_feasibility(&plant, &gains).feasible {
            continue;
        }
        let delta = Poly::monic(&[lambda]);
        let Ok((_, controller)) =
            synthesize(&plant, &gains, &delta, 1.0, XeqNormalization::Output)
        else {
            continue;
        };
        if controller.x_eq.iter().any(|&v| !(v > 0.0)) {
            continue;
        }
        let x0 = controller.x_eq.iter().map(|&v| v * rng.gen_range(0.0..3.0)).collect();
        return Ok(Sample { plant, gains, lambda, controller, x0 });
    }
    bail!("no positive feasible plant found in {MAX_DRAWS} draws")
}

#[derive(Debug, Clone, Serialize)]
struct ProbeResult {
    termination: Termination,
    sliding_onset: Option<f64>,
    crossing_count: usize,
    final_rel_error: f64,
    converged: bool,
}

fn simulate(spec: &ProbeSpec, s: &Sample) -> Result<ProbeResult> {
    let base = SimConfig::new(spec.dt, spec.t_end);
    let stride = (base.steps() / 100).max(1);
    let cfg = base.with_chatter_band(&s.plant, &s.controller, &s.gains).with_stride(stride);
    let traj = simulate_switched_linear(
        &s.plant,
        &s.controller,
        &s.gains,
        GainSelector::new(SelectionPolicy::Midpoint),
        &s.x0,
        &cfg,
    )?;
    let x_eq = &s.controller.x_eq;
    let diff: Vec<f64> = traj.final_state().iter().zip(x_eq).map(|(a, b)| a - b).collect();
    let final_rel_error = norm2(&diff) / norm2(x_eq);
    let termination = traj.termination();
    Ok(ProbeResult {
        termination,
        sliding_onset: traj.first_onset().map(|e| e.time),
        crossing_count: traj.events_of(EventKind::SurfaceCrossing).count(),
        final_rel_error,
        converged: termination == Termination::Completed && final_rel_error <= spec.tolerance,
    })
}

/// Writes `positive_2d.csv` (one row per plant) and `positive_2d.json`.
pub fn run(spec: &ProbeSpec, seed: u64, out: &mut Artifacts) -> Result<()> {
    if spec.count == 0 || !(spec.tolerance > 0.0) {
        bail!("positive_2d needs count > 0 and tolerance > 0");
    }
    let samples = (0..spec.count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(STREAM_BASE + k as u64);
            draw(&mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let results = samples
        .par_iter()
        .map(|s| simulate(spec, s))
        .collect::<Result<Vec<_>>>()?;

    let header: Vec<String> = [
        "plant", "f11", "f12", "f21", "f22", "g1", "g2", "h1", "h2", "i1_lo", "i1_hi", "i2_lo",
        "i2_hi", "lambda", "x0_1", "x0_2", "xeq_1", "xeq_2", "sliding_onset", "crossing_count",
        "final_rel_error", "converged",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = samples
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(k, (s, r))| {
            let p = &s.plant;
            let mut row = vec![k.to_string()];
            row.extend(
                [
                    p.f[(0, 0)],
                    p.f[(0, 1)],
                    p.f[(1, 0)],
                    p.f[(1, 1)],
                    p.g[0],
                    p.g[1],
                    p.h[0],
                    p.h[1],
                    s.gains.i1_lo,
                    s.gains.i1_hi,
                    s.gains.i2_lo,
                    s.gains.i2_hi,
                    s.lambda,
                    s.x0[0],
                    s.x0[1],
                    s.controller.x_eq[0],
                    s.controller.x_eq[1],
                ]
                .map(num),
            );
            row.push(opt_num(r.sliding_onset));
            row.push(r.crossing_count.to_string());
            row.push(num(r.final_rel_error));
            row.push(r.converged.to_string());
            row
        })
        .collect();
    out.csv("positive_2d.csv", &header, &rows)?;

    let not_converged: Vec<usize> =
        results.iter().enumerate().filter(|(_, r)| !r.converged).map(|(k, _)| k).collect();
    out.json(
        "positive_2d.json",
        &serde_json::json!({
            "count": spec.count,
            "converged": spec.count - not_converged.len(),
            "not_converged": not_converged,
            "spec": spec,
        }),
    )
}
