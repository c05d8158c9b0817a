//! Config schemas. Every struct rejects unknown keys.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use smc_core::epidemics::{ControlTarget, EpidemicModel};
use smc_core::global_analysis::GlobalParams;
use smc_core::linalg::Poly;
use smc_core::sim::SimConfig;
use smc_core::synthesis::{
    Controller, GainIntervals, GainSelector, Plant, SelectionPolicy, XeqNormalization,
};

pub fn parse<T: DeserializeOwned>(raw: &[u8]) -> Result<T> {
    serde_json::from_slice(raw).context("invalid config")
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeConfig {
    pub plant: Plant<f64>,
    pub gains: GainIntervals<f64>,
    /// Ascending coefficients of the monic sliding polynomial.
    pub delta_poly: Poly<f64>,
    #[serde(default = "one")]
    pub setpoint: f64,
    #[serde(default)]
    pub normalization: XeqNormalization,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Inline synthesis parameters for `simulate`; plant and gains come from
/// the enclosing config.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSpec {
    pub delta_poly: Poly<f64>,
    #[serde(default = "one")]
    pub setpoint: f64,
    #[serde(default)]
    pub normalization: XeqNormalization,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub plant: Plant<f64>,
    pub gains: GainIntervals<f64>,
    #[serde(default)]
    pub controller: Option<Controller<f64>>,
    /// Path to a `controller.json`, relative to this config file.
    #[serde(default)]
    pub controller_file: Option<PathBuf>,
    #[serde(default)]
    pub synthesis: Option<SynthesisSpec>,
    pub x0: Vec<f64>,
    pub sim: SimSpec,
    #[serde(default)]
    pub selector: SelectorSpec,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A fixed hysteresis band, or `"chatter"` to size it from one switching
/// step near the equilibrium.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Band {
    Value(f64),
    Rule(BandRule),
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandRule {
    Chatter,
}

/// Integration settings. Only `dt` and `t_end` are required; the rest
/// override the defaults of [`SimConfig::new`].
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hysteresis_band: Option<Band>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sliding_sigma_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sliding_window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_tol: Option<f64>,
    #[serde(default = "one_usize")]
    pub record_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_limit: Option<f64>,
}

impl SimSpec {
    /// `linear` supplies what the `"chatter"` band rule needs.
    pub fn resolve(
        &self,
        linear: Option<(&Plant<f64>, &Controller<f64>, &GainIntervals<f64>)>,
    ) -> Result<SimConfig<f64>> {
        let mut c = SimConfig::new(self.dt, self.t_end).with_stride(self.record_stride);
        match (self.hysteresis_band, linear) {
            (None, _) => {}
            (Some(Band::Value(b)), _) => c = c.with_band(b),
            (Some(Band::Rule(BandRule::Chatter)), Some((plant, ctrl, gains))) => {
                c = c.with_chatter_band(plant, ctrl, gains)
            }
            (Some(Band::Rule(BandRule::Chatter)), None) => {
                bail!("the \"chatter\" band rule is only available for linear plants")
            }
        }
        if let Some(v) = self.sliding_sigma_tol {
            c.sliding_sigma_tol = v;
        }
        if let Some(v) = self.sliding_window {
            c.sliding_window = v;
        }
        if let Some(v) = self.event_tol {
            c.event_tol = v;
        }
        if let Some(v) = self.divergence_limit {
            c.divergence_limit = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorSpec {
    pub policy: SelectionPolicy,
    /// Gains for `EXTERNAL_TRACE`, consumed one per step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

impl Default for SelectorSpec {
    fn default() -> Self {
        Self { policy: SelectionPolicy::Midpoint, trace: Vec::new() }
    }
}

impl SelectorSpec {
    pub fn build(&self, seed: u64) -> Result<GainSelector<f64>> {
        match self.policy {
            SelectionPolicy::ExternalTrace => {
                if self.trace.is_empty() {
                    bail!("EXTERNAL_TRACE needs a non-empty `trace`");
                }
                Ok(GainSelector::external(self.trace.clone()))
            }
            _ if !self.trace.is_empty() => bail!("`trace` is only used by EXTERNAL_TRACE"),
            SelectionPolicy::RandomUniform => Ok(GainSelector::random(seed)),
            p => Ok(GainSelector::new(p)),
        }
    }
}

/// `I0` with either `lambda` (first-order `s + lambda`) or a full
/// ascending `delta_poly`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub i0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_poly: Option<Poly<f64>>,
}

impl TargetSpec {
    pub fn build(&self, model: &EpidemicModel<f64>) -> Result<ControlTarget<f64>> {
        let target = match (self.lambda, &self.delta_poly) {
            (Some(l), None) => ControlTarget::first_order(self.i0, l),
            (None, Some(p)) => ControlTarget { i0: self.i0, delta_poly: p.clone() },
            _ => bail!("target needs exactly one of `lambda` or `delta_poly`"),
        };
        model.validate()?;
        target.validate(model)?;
        Ok(target)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EpidemicConfig {
    pub model: EpidemicModel<f64>,
    pub target: TargetSpec,
    /// Compartment fractions in model order, summing to one.
    pub x0: Vec<f64>,
    pub sim: SimSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    #[serde(default = "default_grid")]
    pub grid_density: usize,
    /// Replaces the computed `(a_F, a_L)`.
    #[serde(default)]
    pub a_override: Option<[f64; 2]>,
}

fn default_grid() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalConfig {
    #[serde(default)]
    pub params: Option<GlobalParams<f64>>,
    #[serde(default)]
    pub model: Option<EpidemicModel<f64>>,
    #[serde(default)]
    pub target: Option<TargetSpec>,
    /// Susceptible fraction at which `beta S` is frozen; defaults to one.
    #[serde(default)]
    pub s_eval: Option<f64>,
    #[serde(default)]
    pub certificate: Option<CertificateSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Epidemic run without a seed; `x0` may be left out when drawn at random.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBase {
    pub model: EpidemicModel<f64>,
    pub target: TargetSpec,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    pub sim: SimSpec,
}

/// Axis values; an empty axis keeps the base value.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub beta_lock: Vec<f64>,
    #[serde(default)]
    pub beta_free: Vec<f64>,
    #[serde(default)]
    pub i0: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default = "default_probe_count")]
    pub count: usize,
    #[serde(default = "default_probe_dt")]
    pub dt: f64,
    #[serde(default = "default_probe_t_end")]
    pub t_end: f64,
    /// Relative distance to `x_eq` at `t_end` that counts as converged.
    #[serde(default = "default_probe_tol")]
    pub tolerance: f64,
}

fn default_probe_count() -> usize {
    50
}
fn default_probe_dt() -> f64 {
    1e-3
}
fn default_probe_t_end() -> f64 {
    100.0
}
fn default_probe_tol() -> f64 {
    1e-2
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self {
            count: default_probe_count(),
            dt: default_probe_dt(),
            t_end: default_probe_t_end(),
            tolerance: default_probe_tol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: SweepBase,
    #[serde(default)]
    pub grid: GridSpec,
    /// Draw each run's `x0` uniformly from the simplex instead of using `base.x0`.
    #[serde(default)]
    pub random_x0: bool,
    /// Settings for `--positive-2d-probe`.
    #[serde(default)]
    pub positive_2d: Option<ProbeSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(extra: &str) -> SimSpec {
        serde_json::from_str(&format!("{{\"dt\": 0.01, \"t_end\": 1.0{extra}}}")).unwrap()
    }

    #[test]
    fn band_accepts_number_or_rule() {
        assert!(matches!(sim(", \"hysteresis_band\": 1e-5").hysteresis_band, Some(Band::Value(_))));
        assert!(matches!(
            sim(", \"hysteresis_band\": \"chatter\"").hysteresis_band,
            Some(Band::Rule(BandRule::Chatter))
        ));
        let bad = serde_json::from_str::<SimSpec>(r#"{"dt":0.01,"t_end":1,"hysteresis_band":"wide"}"#);
        assert!(bad.is_err());
        assert!(sim(", \"hysteresis_band\": \"chatter\"").resolve(None).is_err());
    }

    #[test]
    fn overrides_land_in_the_sim_config() {
        let c = sim(", \"hysteresis_band\": 1e-5, \"sliding_sigma_tol\": 3e-4, \"record_stride\": 4")
            .resolve(None)
            .unwrap();
        assert_eq!(c.hysteresis_band, 1e-5);
        assert_eq!(c.sliding_sigma_tol, 3e-4);
        assert_eq!(c.record_stride, 4);
        assert!(sim(", \"record_stride\": 0").resolve(None).is_err());
    }

    #[test]
    fn selector_trace_rules() {
        let ext = SelectorSpec { policy: SelectionPolicy::ExternalTrace, trace: vec![] };
        assert!(ext.build(0).is_err());
        let mid = SelectorSpec { policy: SelectionPolicy::Midpoint, trace: vec![0.1] };
        assert!(mid.build(0).is_err());
        let rnd = SelectorSpec { policy: SelectionPolicy::RandomUniform, trace: vec![] };
        assert_eq!(rnd.build(9).unwrap().seed(), Some(9));
    }

    #[test]
    fn target_needs_exactly_one_shape() {
        let model: EpidemicModel<f64> = serde_json::from_str(
            r#"{"kind":"seir","beta_lock":0.2,"beta_free":0.8,"delta":0.2,"epsilon":0.2}"#,
        )
        .unwrap();
        let both = TargetSpec { i0: 1e-3, lambda: Some(1.0), delta_poly: Some(Poly::monic(&[1.0])) };
        assert!(both.build(&model).is_err());
        let neither = TargetSpec { i0: 1e-3, lambda: None, delta_poly: None };
        assert!(neither.build(&model).is_err());
        let ok = TargetSpec { i0: 1e-3, lambda: Some(1.0), delta_poly: None };
        assert_eq!(ok.build(&model).unwrap().lambda(), 1.0);
    }
}
