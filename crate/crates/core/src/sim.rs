//! Fixed-step RK4 integration of switched closed loops with surface-crossing
//! localization and empirical sliding detection.
//!
//! The gain is sampled: at each grid point the law evaluates `sigma`, picks
//! an interval with hysteresis, and the chosen gain is held for the whole
//! step. A sign change of `sigma` inside a step is located by bisection on
//! the step length and logged as a [`EventKind::SurfaceCrossing`]. Sliding
//! is declared once `|sigma|` stays within `sliding_sigma_tol` at every
//! sample of a `sliding_window`; the onset is stamped at the start of that
//! window and the crossings recorded inside it (the chatter that made up the
//! window) are discarded.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{lit, to_f64, Real};
use crate::synthesis::{
    switching_sigma, Controller, GainIntervals, GainSelector, IntervalChoice, Plant,
    SynthesisError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("initial state has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("initial state rejected: {0}")]
    InvalidInitialState(String),
    #[error(transparent)]
    Selection(#[from] SynthesisError),
    #[error("no sliding interval of sufficient length")]
    NoSlidingInterval,
    #[error("too few samples above the residual cutoff to fit a rate")]
    TooFewSamples,
    #[error("inconsistent trajectory: {0}")]
    InvalidTrajectory(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SimConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub event_tol: T,
    pub hysteresis_band: T,
    pub sliding_window: T,
    pub sliding_sigma_tol: T,
    /// Keep every `record_stride`-th sample (the last sample is always kept).
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    /// Largest state magnitude accepted before the run counts as diverged.
    #[serde(default = "default_divergence_limit")]
    pub divergence_limit: T,
}

fn default_stride() -> usize {
    1
}

fn default_divergence_limit<T: Real>() -> T {
    lit(1e12)
}

pub const DEFAULT_HYSTERESIS_BAND: f64 = 1e-6;

impl<T: Real> SimConfig<T> {
    /// Defaults: band `1e-6`, sliding tolerance `10 * band`, window `50 dt`,
    /// event tolerance `1e-6 dt`.
    pub fn new(dt: T, t_end: T) -> Self {
        let band: T = lit(DEFAULT_HYSTERESIS_BAND);
        Self {
            dt,
            t_end,
            event_tol: dt * lit(1e-6),
            hysteresis_band: band,
            sliding_window: dt * lit(50.0),
            sliding_sigma_tol: band * lit(10.0),
            record_stride: 1,
            divergence_limit: default_divergence_limit(),
        }
    }

    /// Sets the band and rescales the sliding tolerance to `10 * band`.
    pub fn with_band(mut self, band: T) -> Self {
        self.hysteresis_band = band;
        self.sliding_sigma_tol = band * lit(10.0);
        self
    }

    /// Picks the band from the size of one chatter step near `x_eq`,
    /// `(i2_hi - i1_lo) |K g| |H x_eq| dt`. A sliding tolerance smaller than
    /// that jump never sees `sigma` settle, so sliding would go undetected.
    pub fn with_chatter_band(
        self,
        plant: &Plant<T>,
        controller: &Controller<T>,
        gains: &GainIntervals<T>,
    ) -> Self {
        let kg = crate::linalg::dot(&controller.k, &plant.g).abs();
        let hx = crate::linalg::dot(&plant.h, &controller.x_eq).abs();
        let jump = (gains.i2_hi - gains.i1_lo) * kg * hx * self.dt;
        self.with_band(jump)
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        let fields = [
            self.dt,
            self.t_end,
            self.event_tol,
            self.hysteresis_band,
            self.sliding_window,
            self.sliding_sigma_tol,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return bad("non-finite field");
        }
        if !(self.dt > T::zero()) {
            return bad("dt must be positive");
        }
        if !(self.t_end > self.dt) {
            return bad("t_end must exceed dt");
        }
        if !(self.event_tol > T::zero() && self.event_tol <= self.dt) {
            return bad("event_tol must lie in (0, dt]");
        }
        if !(self.sliding_window >= self.dt) {
            return bad("sliding_window must be at least dt");
        }
        if self.hysteresis_band < T::zero() || self.sliding_sigma_tol < T::zero() {
            return bad("band and sliding tolerance must be nonnegative");
        }
        if self.record_stride == 0 {
            return bad("record_stride must be positive");
        }
        if !(self.divergence_limit > T::zero()) {
            return bad("divergence_limit must be positive");
        }
        Ok(())
    }

    /// Number of integration steps; the last step lands exactly on `t_end`.
    pub fn steps(&self) -> usize {
        let n = (to_f64(self.t_end) / to_f64(self.dt)).ceil();
        n.max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    SurfaceCrossing,
    SlidingOnset,
    SlidingExit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event<T> {
    pub kind: EventKind,
    pub time: T,
    pub state: Vec<T>,
    /// Sign of `sigma` after a crossing; `0` for sliding events.
    pub direction: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    Completed,
    Diverged,
    InvalidState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    dim: usize,
    times: Vec<T>,
    /// Row-major, `dim` entries per sample.
    states: Vec<T>,
    gamma_trace: Vec<T>,
    sigma_trace: Vec<T>,
    events: Vec<Event<T>>,
    termination: Termination,
    diagnostic: Option<String>,
}

impl<T: Real> Trajectory<T> {
    /// Assembles a trajectory from raw parts, checking its invariants.
    pub fn from_parts(
        dim: usize,
        times: Vec<T>,
        states: Vec<T>,
        gamma_trace: Vec<T>,
        sigma_trace: Vec<T>,
        events: Vec<Event<T>>,
    ) -> Result<Self> {
        let n = times.len();
        if dim == 0 || states.len() != n * dim || gamma_trace.len() != n || sigma_trace.len() != n
        {
            return Err(SimError::InvalidTrajectory("length mismatch".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SimError::InvalidTrajectory("times not strictly increasing".into()));
        }
        if events.windows(2).any(|w| w[1].time < w[0].time) {
            return Err(SimError::InvalidTrajectory("events not time-sorted".into()));
        }
        Ok(Self {
            dim,
            times,
            states,
            gamma_trace,
            sigma_trace,
            events,
            termination: Termination::Completed,
            diagnostic: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn state(&self, k: usize) -> &[T] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.states.chunks_exact(self.dim)
    }

    pub fn component(&self, i: usize) -> impl Iterator<Item = T> + '_ {
        self.states.iter().skip(i).step_by(self.dim).copied()
    }

    pub fn final_state(&self) -> &[T] {
        self.state(self.len() - 1)
    }

    pub fn gamma_trace(&self) -> &[T] {
        &self.gamma_trace
    }

    pub fn sigma_trace(&self) -> &[T] {
        &self.sigma_trace
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event<T>> + '_ {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn first_onset(&self) -> Option<&Event<T>> {
        self.events_of(EventKind::SlidingOnset).next()
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn diagnostic(&self) -> Option<&str> {
        self.diagnostic.as_deref()
    }

    /// CSV with header `t,x1..xn,gamma,sigma`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = String::from("t");
        for i in 1..=self.dim {
            header.push_str(&format!(",x{i}"));
        }
        writeln!(w, "{header},gamma,sigma")?;
        for k in 0..self.len() {
            write!(w, "{:.16e}", to_f64(self.times[k]))?;
            for &x in self.state(k) {
                write!(w, ",{:.16e}", to_f64(x))?;
            }
            writeln!(
                w,
                ",{:.16e},{:.16e}",
                to_f64(self.gamma_trace[k]),
                to_f64(self.sigma_trace[k])
            )?;
        }
        Ok(())
    }

    /// Event log as `{"events":[{kind,time,state,direction}]}`.
    pub fn events_json(&self) -> serde_json::Value {
        let events: Vec<_> = self
            .events
            .iter()
            .map(|e| {
                serde_json::json!({
                    "kind": e.kind,
                    "time": to_f64(e.time),
                    "state": e.state.iter().map(|&x| to_f64(x)).collect::<Vec<_>>(),
                    "direction": e.direction,
                })
            })
            .collect();
        serde_json::json!({ "events": events })
    }
}

/// Right-hand side `x' = f(x, gamma)` of a switched system.
pub trait SwitchedDynamics<T> {
    fn dim(&self) -> usize;
    fn derivative(&self, x: &[T], gamma: T, out: &mut [T]);
    /// Rejects states outside the model's validity region.
    fn check_state(&self, _x: &[T]) -> std::result::Result<(), String> {
        Ok(())
    }
}

/// A switching law: `sigma(x)` and the gain applied for a given interval choice.
pub trait FeedbackLaw<T> {
    fn sigma(&self, x: &[T]) -> T;
    /// Interval choice and the parameter handed to the dynamics.
    fn choose(
        &mut self,
        sigma: T,
        previous: Option<IntervalChoice>,
        band: T,
    ) -> std::result::Result<(IntervalChoice, T), SynthesisError>;
    /// The value stored in the gamma trace (defaults to the parameter itself).
    fn recorded_gain(&self, _x: &[T], gamma: T) -> T {
        gamma
    }
}

/// `x' = (F + g H gamma) x`.
pub struct LinearDynamics<'a, T> {
    pub plant: &'a Plant<T>,
}

impl<T: Real> SwitchedDynamics<T> for LinearDynamics<'_, T> {
    fn dim(&self) -> usize {
        self.plant.dim()
    }

    fn derivative(&self, x: &[T], gamma: T, out: &mut [T]) {
        let p = self.plant;
        let hx = p.h.iter().zip(x).fold(T::zero(), |a, (&h, &xi)| a + h * xi);
        let u = gamma * hx;
        for (i, o) in out.iter_mut().enumerate() {
            let fx = (0..x.len()).fold(T::zero(), |a, j| a + p.f[(i, j)] * x[j]);
            *o = fx + p.g[i] * u;
        }
    }
}

/// The synthesized sliding-mode law with a gain selector.
pub struct ControllerLaw<'a, T> {
    pub controller: &'a Controller<T>,
    pub gains: GainIntervals<T>,
    pub selector: GainSelector<T>,
}

impl<T: Real> FeedbackLaw<T> for ControllerLaw<'_, T> {
    fn sigma(&self, x: &[T]) -> T {
        switching_sigma(self.controller, x)
    }

    fn choose(
        &mut self,
        sigma: T,
        previous: Option<IntervalChoice>,
        band: T,
    ) -> std::result::Result<(IntervalChoice, T), SynthesisError> {
        self.selector.select_gain(&self.gains, sigma, previous, band)
    }
}

/// Simulates the switched linear closed loop `x' = (F + gH gamma) x`.
pub fn simulate_switched_linear<T: Real>(
    plant: &Plant<T>,
    controller: &Controller<T>,
    gains: &GainIntervals<T>,
    selector: GainSelector<T>,
    x0: &[T],
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>> {
    let dynamics = LinearDynamics { plant };
    let mut law = ControllerLaw { controller, gains: *gains, selector };
    simulate_nonlinear(&dynamics, &mut law, x0, cfg)
}

struct Rk4Scratch<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Real> Rk4Scratch<T> {
    fn new(n: usize) -> Self {
        let z = vec![T::zero(); n];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }
}

fn rk4_step<T: Real, D: SwitchedDynamics<T> + ?Sized>(
    dynamics: &D,
    x: &[T],
    gamma: T,
    h: T,
    s: &mut Rk4Scratch<T>,
    out: &mut [T],
) {
    let half: T = lit(0.5);
    let sixth = h / lit(6.0);
    dynamics.derivative(x, gamma, &mut s.k1);
    for i in 0..x.len() {
        s.tmp[i] = x[i] + half * h * s.k1[i];
    }
    dynamics.derivative(&s.tmp, gamma, &mut s.k2);
    for i in 0..x.len() {
        s.tmp[i] = x[i] + half * h * s.k2[i];
    }
    dynamics.derivative(&s.tmp, gamma, &mut s.k3);
    for i in 0..x.len() {
        s.tmp[i] = x[i] + h * s.k3[i];
    }
    dynamics.derivative(&s.tmp, gamma, &mut s.k4);
    let two: T = lit(2.0);
    for i in 0..x.len() {
        out[i] = x[i] + sixth * (s.k1[i] + two * s.k2[i] + two * s.k3[i] + s.k4[i]);
    }
}

fn sign<T: Real>(x: T) -> i8 {
    if x > T::zero() {
        1
    } else if x < T::zero() {
        -1
    } else {
        0
    }
}

/// Tracks the band/dwell classification of sliding.
struct SlidingDetector<T> {
    sliding: bool,
    window_start: Option<(T, Vec<T>, usize)>,
    outside: usize,
}

impl<T: Real> SlidingDetector<T> {
    fn observe(&mut self, t: T, x: &[T], sigma: T, cfg: &SimConfig<T>, events: &mut Vec<Event<T>>) {
        let inside = sigma.abs() <= cfg.sliding_sigma_tol;
        if self.sliding {
            if inside {
                self.outside = 0;
                return;
            }
            self.outside += 1;
            if self.outside >= 2 {
                events.push(Event {
                    kind: EventKind::SlidingExit,
                    time: t,
                    state: x.to_vec(),
                    direction: 0,
                });
                self.sliding = false;
                self.outside = 0;
            }
            return;
        }
        if !inside {
            self.window_start = None;
            return;
        }
        let (start, _, _) = self
            .window_start
            .get_or_insert_with(|| (t, x.to_vec(), events.len()));
        // Small slack so that accumulated `k * dt` rounding cannot delay onset by a step.
        if t - *start >= cfg.sliding_window - cfg.dt * lit(1e-6) {
            let (start, state, first_pending) = self.window_start.take().unwrap();
            events.truncate(first_pending);
            events.push(Event { kind: EventKind::SlidingOnset, time: start, state, direction: 0 });
            self.sliding = true;
            self.outside = 0;
        }
    }
}

/// Integrates `x' = f(x, gamma)` under `law`.
///
/// A non-finite or oversized state ends the run with
/// [`Termination::Diverged`]; a state rejected by the dynamics ends it with
/// [`Termination::InvalidState`]. Either way the trajectory up to the last
/// good sample is returned along with a diagnostic.
pub fn simulate_nonlinear<T, D, L>(
    dynamics: &D,
    law: &mut L,
    x0: &[T],
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>>
where
    T: Real,
    D: SwitchedDynamics<T> + ?Sized,
    L: FeedbackLaw<T> + ?Sized,
{
    cfg.validate()?;
    let n = dynamics.dim();
    if x0.len() != n {
        return Err(SimError::Dimension { expected: n, got: x0.len() });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::InvalidInitialState("non-finite entry".into()));
    }
    dynamics.check_state(x0).map_err(SimError::InvalidInitialState)?;

    let steps = cfg.steps();
    let cap = steps / cfg.record_stride + 2;
    let mut traj = Trajectory {
        dim: n,
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap * n),
        gamma_trace: Vec::with_capacity(cap),
        sigma_trace: Vec::with_capacity(cap),
        events: Vec::new(),
        termination: Termination::Completed,
        diagnostic: None,
    };
    let mut detector = SlidingDetector { sliding: false, window_start: None, outside: 0 };
    let mut scratch = Rk4Scratch::new(n);
    let mut x = x0.to_vec();
    let mut next = vec![T::zero(); n];
    let mut probe = vec![T::zero(); n];
    let mut previous: Option<IntervalChoice> = None;
    let mut sigma = law.sigma(&x);
    let mut t = T::zero();

    for k in 0..steps {
        let (choice, gamma) = law.choose(sigma, previous, cfg.hysteresis_band)?;
        previous = Some(choice);
        detector.observe(t, &x, sigma, cfg, &mut traj.events);
        if k % cfg.record_stride == 0 {
            traj.push(t, &x, law.recorded_gain(&x, gamma), sigma);
        }

        let t_next = if k + 1 == steps { cfg.t_end } else { lit::<T>(k as f64 + 1.0) * cfg.dt };
        let h = t_next - t;
        rk4_step(dynamics, &x, gamma, h, &mut scratch, &mut next);

        let norm = next.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
        if !norm.is_finite() || norm > cfg.divergence_limit {
            traj.termination = Termination::Diverged;
            traj.diagnostic = Some(format!(
                "state magnitude {:e} exceeded limit at t = {:e}",
                to_f64(norm),
                to_f64(t_next)
            ));
            break;
        }
        if let Err(msg) = dynamics.check_state(&next) {
            traj.termination = Termination::InvalidState;
            traj.diagnostic = Some(format!("t = {:e}: {msg}", to_f64(t_next)));
            break;
        }

        let sigma_next = law.sigma(&next);
        if !detector.sliding && sigma * sigma_next < T::zero() {
            let (tau, s_at) = locate_crossing(
                dynamics, law, &x, gamma, sigma, h, cfg.event_tol, &mut scratch, &mut probe,
            );
            traj.events.push(Event {
                kind: EventKind::SurfaceCrossing,
                time: t + tau,
                state: probe.clone(),
                direction: if s_at == 0 { sign(sigma_next) } else { s_at },
            });
        }

        std::mem::swap(&mut x, &mut next);
        sigma = sigma_next;
        t = t_next;
    }

    if traj.termination == Termination::Completed {
        detector.observe(t, &x, sigma, cfg, &mut traj.events);
        let gamma = traj.gamma_trace.last().copied().unwrap_or_else(T::zero);
        let last = traj.times.last().copied();
        if last != Some(t) {
            traj.push(t, &x, gamma, sigma);
        }
    }
    Ok(traj)
}

impl<T: Real> Trajectory<T> {
    fn push(&mut self, t: T, x: &[T], gamma: T, sigma: T) {
        self.times.push(t);
        self.states.extend_from_slice(x);
        self.gamma_trace.push(gamma);
        self.sigma_trace.push(sigma);
    }
}

/// Bisects the step length for the zero of `sigma`; leaves the state at the
/// crossing in `probe` and returns `(tau, sign of sigma there)`.
#[allow(clippy::too_many_arguments)]
fn locate_crossing<T, D, L>(
    dynamics: &D,
    law: &L,
    x: &[T],
    gamma: T,
    sigma0: T,
    h: T,
    event_tol: T,
    scratch: &mut Rk4Scratch<T>,
    probe: &mut [T],
) -> (T, i8)
where
    T: Real,
    D: SwitchedDynamics<T> + ?Sized,
    L: FeedbackLaw<T> + ?Sized,
{
    let target = sigma0.abs() * lit(1e-3);
    let (mut lo, mut hi) = (T::zero(), h);
    let mut best = (h, None::<T>);
    while hi - lo > event_tol {
        let mid = (lo + hi) * lit(0.5);
        rk4_step(dynamics, x, gamma, mid, scratch, probe);
        let s = law.sigma(probe);
        if s.abs() <= target {
            return (mid, sign(s));
        }
        if sign(s) == sign(sigma0) {
            lo = mid;
        } else {
            hi = mid;
            best = (mid, Some(s));
        }
    }
    let tau = best.0;
    rk4_step(dynamics, x, gamma, tau, scratch, probe);
    let s = best.1.unwrap_or_else(|| law.sigma(probe));
    (tau, sign(s))
}

/// Start and end time of the first sliding interval, if any.
pub fn sliding_interval<T: Real>(traj: &Trajectory<T>) -> Option<(T, T)> {
    let onset = traj.first_onset()?.time;
    let end = traj
        .events_of(EventKind::SlidingExit)
        .find(|e| e.time > onset)
        .map(|e| e.time)
        .unwrap_or_else(|| *traj.times().last().expect("nonempty"));
    Some((onset, end))
}

/// Least-squares decay rate of `|x_i(t) - setpoint|` over the first sliding
/// interval, ignoring samples whose residual is at or below `min_residual`.
pub fn fit_sliding_decay<T: Real>(
    traj: &Trajectory<T>,
    component: usize,
    setpoint: T,
    min_residual: T,
) -> Result<T> {
    if component >= traj.dim() {
        return Err(SimError::InvalidTrajectory(format!("component {component} out of range")));
    }
    let (start, end) = sliding_interval(traj).ok_or(SimError::NoSlidingInterval)?;
    let dt_est = if traj.len() > 1 { traj.times[1] - traj.times[0] } else { T::zero() };
    if end - start < dt_est * lit(10.0) {
        return Err(SimError::NoSlidingInterval);
    }
    let pts: Vec<(f64, f64)> = traj
        .times()
        .iter()
        .zip(traj.component(component))
        .filter(|(&t, _)| t >= start && t <= end)
        .map(|(&t, x)| (to_f64(t), to_f64((x - setpoint).abs())))
        .filter(|&(_, r)| r > to_f64(min_residual))
        .map(|(t, r)| (t, r.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(SimError::TooFewSamples);
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), &(t, y)| {
        (sxy + (t - tm) * (y - ym), sxx + (t - tm) * (t - tm))
    });
    if sxx == 0.0 {
        return Err(SimError::TooFewSamples);
    }
    Ok(lit(-sxy / sxx))
}

/// Surface crossings before the first sliding onset, as `(time, x_i)`
/// pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CrossingSequence<T> {
    /// Values of crossings landing below the setpoint, in time order.
    pub lower_hits: Vec<T>,
    /// Values of crossings landing above the setpoint, in time order.
    pub upper_hits: Vec<T>,
    /// All crossings in time order.
    pub ordered: Vec<(T, T)>,
}

pub fn crossing_sequence<T: Real>(
    traj: &Trajectory<T>,
    component: usize,
    setpoint: T,
) -> CrossingSequence<T> {
    let onset = traj.first_onset().map(|e| e.time);
    let mut seq = CrossingSequence {
        lower_hits: Vec::new(),
        upper_hits: Vec::new(),
        ordered: Vec::new(),
    };
    for e in traj.events_of(EventKind::SurfaceCrossing) {
        if onset.is_some_and(|t| e.time >= t) {
            break;
        }
        let v = e.state[component];
        seq.ordered.push((e.time, v));
        if v < setpoint {
            seq.lower_hits.push(v);
        } else {
            seq.upper_hits.push(v);
        }
    }
    seq
}
