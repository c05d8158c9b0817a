//! Global behaviour of the switched SEIR loop in the `(E, I)` plane.
//!
//! With `gamma_F` (freedom) and `gamma_L` (lockdown) frozen, the plane splits
//! into `R_FREE = {eps E + (lambda - delta) I < lambda I0}`, `R_LOCK` and the
//! sliding line `L` between them. This module classifies how the two vector
//! fields meet `L`, locates the attractive sliding zone, and numerically
//! certifies the quadratic Lyapunov functions
//! `V_i = eps (E - E0)^2 + delta (I - a_i I0)^2` used to rule out limit cycles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epidemics::{condition_threshold, ControlTarget, EpidemicModel};
use crate::linalg::{symmetric_eigen_bounds, Matrix};
use crate::num::{count, lit, Real};
use crate::sim::{crossing_sequence, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GlobalError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("gamma_F = {gamma_f} does not exceed delta = {delta}: no growing free mode")]
    Degenerate { gamma_f: f64, delta: f64 },
    #[error("requires lambda > delta")]
    NotApplicable,
    #[error("model has no global analysis")]
    UnsupportedModel,
}

pub type Result<T> = std::result::Result<T, GlobalError>;

/// Which reduction the parameters come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnalysisBasis {
    #[default]
    Seir,
    /// SAIR mapped onto the SEIR formulas (`eps := eps1`, gains rescaled so
    /// the SAIR threshold lands on `delta`). Not an exact reduction.
    SairByAnalogy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct GlobalParams<T> {
    pub gamma_f: T,
    pub gamma_l: T,
    pub delta: T,
    pub epsilon: T,
    pub lambda: T,
    pub i0: T,
    /// Susceptible fraction at which `gamma = beta S` was evaluated.
    #[serde(default = "one")]
    pub s_eval: T,
    #[serde(default)]
    pub basis: AnalysisBasis,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> GlobalParams<T> {
    pub fn new(gamma_f: T, gamma_l: T, delta: T, epsilon: T, lambda: T, i0: T) -> Result<Self> {
        let p = Self {
            gamma_f,
            gamma_l,
            delta,
            epsilon,
            lambda,
            i0,
            s_eval: T::one(),
            basis: AnalysisBasis::Seir,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.gamma_f, self.gamma_l, self.delta, self.epsilon, self.lambda, self.i0];
        if all.iter().any(|v| !(v.is_finite() && *v > T::zero())) {
            return Err(GlobalError::InvalidParams("all parameters must be positive".into()));
        }
        if !(self.gamma_l < self.gamma_f) {
            return Err(GlobalError::InvalidParams("need gamma_l < gamma_f".into()));
        }
        Ok(())
    }

    /// Freezes `gamma_i = beta_i S` at `s_eval`. SAIR goes through the
    /// analogy described in [`AnalysisBasis::SairByAnalogy`].
    pub fn from_model(
        model: &EpidemicModel<T>,
        target: &ControlTarget<T>,
        s_eval: T,
    ) -> Result<Self> {
        let (bl, bf) = model.betas();
        let lambda = target.lambda();
        let mut p = match *model {
            EpidemicModel::Seir(m) => Self::new(
                bf * s_eval,
                bl * s_eval,
                m.delta,
                m.epsilon,
                lambda,
                target.i0,
            )?,
            EpidemicModel::Sair(m) => {
                let scale = m.delta / condition_threshold(model);
                let mut p =
                    Self::new(bf * s_eval * scale, bl * s_eval * scale, m.delta, m.eps1, lambda, target.i0)?;
                p.basis = AnalysisBasis::SairByAnalogy;
                p
            }
            EpidemicModel::Seair(_) => return Err(GlobalError::UnsupportedModel),
        };
        p.s_eval = s_eval;
        Ok(p)
    }

    /// Sliding-line equilibrium `(E0, I0) = (delta I0 / eps, I0)`.
    pub fn x_eq(&self) -> (T, T) {
        (self.delta / self.epsilon * self.i0, self.i0)
    }

    /// `eps E + (lambda - delta) I - lambda I0`: negative in `R_FREE`.
    pub fn line_value(&self, e: T, i: T) -> T {
        self.epsilon * e + (self.lambda - self.delta) * i - self.lambda * self.i0
    }

    /// `delta + (eps / delta) gamma`.
    fn gain_threshold(&self, gamma: T) -> T {
        self.delta + self.epsilon / self.delta * gamma
    }
}

/// Dominant (Frobenius) mode of `F + gH gamma_F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrobeniusData<T> {
    pub lambda_fr: T,
    pub w_fr: [T; 2],
    /// `I` where the ray along `w_fr` meets the sliding line.
    pub i_fr: T,
    /// `E` at that intersection.
    pub e_fr: T,
}

/// Largest eigenvalue of `[[-eps, gamma], [eps, -delta]]` and its eigenvector.
fn dominant_mode<T: Real>(p: &GlobalParams<T>, gamma: T) -> (T, [T; 2]) {
    let (d, e) = (p.delta, p.epsilon);
    let two: T = lit(2.0);
    let root = ((d - e) * (d - e) + lit::<T>(4.0) * e * gamma).sqrt();
    ((-(d + e) + root) / two, [(d - e) + root, two * e])
}

pub fn frobenius_free<T: Real>(p: &GlobalParams<T>) -> Result<FrobeniusData<T>> {
    if !(p.gamma_f > p.delta) {
        return Err(GlobalError::Degenerate {
            gamma_f: crate::num::to_f64(p.gamma_f),
            delta: crate::num::to_f64(p.delta),
        });
    }
    let (lambda_fr, w_fr) = dominant_mode(p, p.gamma_f);
    let l = p.lambda;
    let i_fr = l / (l + lambda_fr) * p.i0;
    let e_fr = l * (p.delta + lambda_fr) / (p.epsilon * (l + lambda_fr)) * p.i0;
    Ok(FrobeniusData { lambda_fr, w_fr, i_fr, e_fr })
}

/// `I` where the dominant eigenvector ray of `F + gH gamma_L` meets the
/// sliding line, `lambda / (lambda + lambda_L) I0`; `None` if it does not.
pub fn frobenius_lock_intersection<T: Real>(p: &GlobalParams<T>) -> Option<T> {
    let (lambda_l, _) = dominant_mode(p, p.gamma_l);
    let denom = p.lambda + lambda_l;
    (denom > T::zero()).then(|| p.lambda / denom * p.i0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LineKind {
    Segment,
    HalfLine,
}

/// `I_MAX = lambda / (lambda - delta) I0` for a segment, `None` (infinite)
/// for a half line.
pub fn sliding_line_geometry<T: Real>(p: &GlobalParams<T>) -> (Option<T>, LineKind) {
    if p.lambda > p.delta {
        (Some(p.lambda / (p.lambda - p.delta) * p.i0), LineKind::Segment)
    } else {
        (None, LineKind::HalfLine)
    }
}

/// Points of the sliding line where the free flow crosses into `R_LOCK`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FreeRegime {
    /// `lambda > delta + (eps/delta) gamma_F`: `I < I1`.
    BelowI1,
    /// `delta + eps <= lambda <= delta + (eps/delta) gamma_F`.
    Any,
    /// `lambda < delta + eps`: `I > I1`.
    AboveI1,
}

/// Points of the sliding line where the lockdown flow crosses into `R_FREE`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LockRegime {
    /// `lambda > delta + eps`: `I > I2`.
    AboveI2,
    /// `delta + (eps/delta) gamma_L <= lambda <= delta + eps`.
    Any,
    /// `lambda4 < lambda < delta + (eps/delta) gamma_L`: `I < I2`.
    BelowI2,
    /// `lambda <= lambda4`.
    AnySlow,
    /// `gamma_L >= delta`: the lockdown field is not stable.
    NotApplicable,
}

fn ratio_or_none<T: Real>(num: T, den: T) -> Option<T> {
    let v = num / den;
    v.is_finite().then_some(v)
}

/// `I1 = lambda (lambda - eps - delta) / (lambda^2 - (delta + eps) lambda - eps (gamma_F - delta)) I0`.
pub fn flow_free_regime<T: Real>(p: &GlobalParams<T>) -> (FreeRegime, Option<T>) {
    let (l, d, e) = (p.lambda, p.delta, p.epsilon);
    let den = l * l - (d + e) * l - e * (p.gamma_f - d);
    let i_one = ratio_or_none(l * (l - e - d) * p.i0, den);
    let regime = if l > p.gain_threshold(p.gamma_f) {
        FreeRegime::BelowI1
    } else if l >= d + e {
        FreeRegime::Any
    } else {
        FreeRegime::AboveI1
    };
    (regime, i_one)
}

/// Roots `lambda3 >= lambda4` of `s^2 - (delta + eps) s + eps (delta - gamma_L)`.
pub fn lock_roots<T: Real>(p: &GlobalParams<T>) -> (T, T) {
    let (d, e) = (p.delta, p.epsilon);
    let disc = ((d - e) * (d - e) + lit::<T>(4.0) * e * p.gamma_l).sqrt();
    let two: T = lit(2.0);
    ((d + e + disc) / two, (d + e - disc) / two)
}

/// Roots `lambda1 > 0` and `-lambda2 < 0` of `s^2 - (delta + eps) s - eps (gamma_F - delta)`.
pub fn free_roots<T: Real>(p: &GlobalParams<T>) -> (T, T) {
    let (d, e) = (p.delta, p.epsilon);
    let disc = ((d + e) * (d + e) + lit::<T>(4.0) * e * (p.gamma_f - d)).sqrt();
    let two: T = lit(2.0);
    ((d + e + disc) / two, (disc - (d + e)) / two)
}

/// `I2 = lambda (lambda - eps - delta) / (lambda^2 - (delta + eps) lambda + eps (delta - gamma_L)) I0`.
pub fn flow_lock_regime<T: Real>(p: &GlobalParams<T>) -> (LockRegime, Option<T>) {
    let (l, d, e) = (p.lambda, p.delta, p.epsilon);
    let den = l * l - (d + e) * l + e * (d - p.gamma_l);
    let i_two = ratio_or_none(l * (l - e - d) * p.i0, den);
    if !(p.gamma_l < d) {
        return (LockRegime::NotApplicable, i_two);
    }
    let (_, l4) = lock_roots(p);
    let regime = if l > d + e {
        LockRegime::AboveI2
    } else if l >= p.gain_threshold(p.gamma_l) {
        LockRegime::Any
    } else if l > l4 {
        LockRegime::BelowI2
    } else {
        LockRegime::AnySlow
    };
    (regime, i_two)
}

/// The four combined cases of the attractive-zone analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AttractiveCase {
    /// `lambda > delta + (eps/delta) gamma_F`: zone `(I2, I1)`, repeated crossings possible.
    MultipleCrossings,
    /// `delta + (eps/delta) gamma_L <= lambda <= delta + (eps/delta) gamma_F`.
    AtMostOneCrossing,
    /// `lambda4 < lambda < delta + (eps/delta) gamma_L`: zone `(I1, I2)`.
    AtMostTwoCrossings,
    /// `lambda <= lambda4`.
    AtMostOneCrossingSlow,
    /// `gamma_L < delta < gamma_F` fails.
    Infeasible,
}

impl AttractiveCase {
    /// Upper bound on line crossings before sliding; `None` means no bound.
    pub fn max_crossings(self) -> Option<u32> {
        match self {
            Self::MultipleCrossings | Self::Infeasible => None,
            Self::AtMostOneCrossing | Self::AtMostOneCrossingSlow => Some(1),
            Self::AtMostTwoCrossings => Some(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SlidingZone<T> {
    /// Open interval of `I` values.
    Interval { lo: T, hi: T },
    WholeLine,
    Empty,
    NotApplicable,
}

impl<T: Real> SlidingZone<T> {
    pub fn contains(&self, i: T) -> bool {
        match *self {
            Self::Interval { lo, hi } => lo < i && i < hi,
            Self::WholeLine => true,
            Self::Empty | Self::NotApplicable => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttractiveZone<T> {
    pub case: AttractiveCase,
    pub zone: SlidingZone<T>,
    pub multiple_crossings_possible: bool,
    pub max_crossings: Option<u32>,
}

/// Intersects the free-to-lock and lock-to-free sets on `[0, I_MAX]`.
pub fn attractive_zone<T: Real>(p: &GlobalParams<T>) -> AttractiveZone<T> {
    let feasible = p.gamma_l < p.delta && p.delta < p.gamma_f;
    let case = if !feasible {
        AttractiveCase::Infeasible
    } else if p.lambda > p.gain_threshold(p.gamma_f) {
        AttractiveCase::MultipleCrossings
    } else if p.lambda >= p.gain_threshold(p.gamma_l) {
        AttractiveCase::AtMostOneCrossing
    } else if p.lambda > lock_roots(p).1 {
        AttractiveCase::AtMostTwoCrossings
    } else {
        AttractiveCase::AtMostOneCrossingSlow
    };
    let zone = if feasible { zone_from_regimes(p) } else { SlidingZone::NotApplicable };
    AttractiveZone {
        case,
        zone,
        multiple_crossings_possible: case == AttractiveCase::MultipleCrossings,
        max_crossings: case.max_crossings(),
    }
}

fn zone_from_regimes<T: Real>(p: &GlobalParams<T>) -> SlidingZone<T> {
    let (i_max, _) = sliding_line_geometry(p);
    let top = i_max.unwrap_or_else(T::infinity);
    let (free, i1) = flow_free_regime(p);
    let (lock, i2) = flow_lock_regime(p);
    let mut lo = T::zero();
    let mut hi = top;
    let mut whole = true;
    match (free, i1) {
        (FreeRegime::BelowI1, Some(i1)) => {
            hi = hi.min(i1);
            whole = false;
        }
        (FreeRegime::AboveI1, Some(i1)) => {
            lo = lo.max(i1);
            whole = false;
        }
        _ => {}
    }
    match (lock, i2) {
        (LockRegime::AboveI2, Some(i2)) => {
            lo = lo.max(i2);
            whole = false;
        }
        (LockRegime::BelowI2, Some(i2)) => {
            hi = hi.min(i2);
            whole = false;
        }
        (LockRegime::NotApplicable, _) => return SlidingZone::NotApplicable,
        _ => {}
    }
    if whole {
        SlidingZone::WholeLine
    } else if lo < hi {
        SlidingZone::Interval { lo, hi }
    } else {
        SlidingZone::Empty
    }
}

/// `a_i = (delta^2 + gamma_i (lambda - delta)) / (lambda delta)` for `(F, L)`.
pub fn lyapunov_coeffs<T: Real>(p: &GlobalParams<T>) -> Result<(T, T)> {
    if !(p.lambda > p.delta) {
        return Err(GlobalError::NotApplicable);
    }
    // Same value, written so that gamma = delta yields exactly 1.
    let a = |g: T| T::one() + (g - p.delta) * (p.lambda - p.delta) / (p.lambda * p.delta);
    Ok((a(p.gamma_f), a(p.gamma_l)))
}

/// `V_i'(E, I)` along the linear field with gain `gamma`.
pub fn vdot<T: Real>(p: &GlobalParams<T>, gamma: T, a: T, e: T, i: T) -> T {
    let (d, eps, i0) = (p.delta, p.epsilon, p.i0);
    let two: T = lit(2.0);
    let r = eps * e - d * i;
    -two * r * r
        + two * eps * (gamma - d) * e * i
        + two * eps * d * (T::one() - a) * i0 * e
        + two * d * (a * d - gamma) * i0 * i
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VdotCertificate<T> {
    pub grid_density: usize,
    pub line_samples: usize,
    pub exclusion_radius: T,
    /// Truncation radius of the unbounded lockdown region.
    pub lock_radius: T,
    pub a_f: T,
    pub a_l: T,
    pub max_vdot_free: T,
    pub argmax_free: (T, T),
    pub max_vdot_lock: T,
    pub argmax_lock: (T, T),
    pub pass: bool,
}

struct Tracker<T> {
    max: T,
    at: (T, T),
}

impl<T: Real> Tracker<T> {
    fn new() -> Self {
        Self { max: T::neg_infinity(), at: (T::nan(), T::nan()) }
    }

    fn offer(&mut self, v: T, e: T, i: T) {
        if v > self.max || v.is_nan() {
            self.max = if v.is_nan() { T::infinity() } else { v };
            self.at = (e, i);
        }
    }
}

/// Samples `V_F'` on `R_FREE ∪ L` and `V_L'` on `R_LOCK ∪ L`, skipping balls of
/// radius `1e-3 I0` around the origin and `x_eq`. `a_override` replaces
/// `(a_F, a_L)`.
pub fn certify_vdot_negative<T: Real>(
    p: &GlobalParams<T>,
    grid_density: usize,
    a_override: Option<(T, T)>,
) -> Result<VdotCertificate<T>> {
    let (a_f, a_l) = match a_override {
        Some(a) => a,
        None => lyapunov_coeffs(p)?,
    };
    if !(p.lambda > p.delta) {
        return Err(GlobalError::NotApplicable);
    }
    let n = grid_density.max(2);
    let excl: T = p.i0 * lit(1e-3);
    let (e0, i0) = p.x_eq();
    let excluded = |e: T, i: T| {
        (e * e + i * i).sqrt() < excl || ((e - e0) * (e - e0) + (i - i0) * (i - i0)).sqrt() < excl
    };
    let (i_max, _) = sliding_line_geometry(p);
    let i_max = i_max.expect("segment when lambda > delta");
    let e_max = p.lambda / p.epsilon * p.i0;

    let mut free = Tracker::new();
    let mut lock = Tracker::new();

    // Bounded free side.
    for r in 0..n {
        let e = e_max * count::<T>(r) / count::<T>(n - 1);
        for c in 0..n {
            let i = i_max * count::<T>(c) / count::<T>(n - 1);
            if p.line_value(e, i) <= T::zero() && !excluded(e, i) {
                free.offer(vdot(p, p.gamma_f, a_f, e, i), e, i);
            }
        }
    }

    // V_L' = -x^T Q x + [a b] x is negative beyond |(a, b)| / lmin(Q).
    let (d, eps) = (p.delta, p.epsilon);
    let two: T = lit(2.0);
    let q = Matrix::from_rows(&[
        vec![two * eps * eps, -eps * (d + p.gamma_l)],
        vec![-eps * (d + p.gamma_l), two * d * d],
    ])
    .expect("2x2");
    let lin_a = two * eps * d * (T::one() - a_l) * p.i0;
    let lin_b = two * d * (a_l * d - p.gamma_l) * p.i0;
    let lmin = symmetric_eigen_bounds(&q).map(|(lo, _)| lo).unwrap_or_else(|_| T::zero());
    let lock_radius = if lmin > T::zero() {
        ((lin_a * lin_a + lin_b * lin_b).sqrt() / lmin).max(e_max).max(i_max) * lit(1.01)
    } else {
        T::infinity()
    };
    let box_side = if lock_radius.is_finite() { lock_radius } else { e_max.max(i_max) * lit(100.0) };
    for r in 0..n {
        let e = box_side * count::<T>(r) / count::<T>(n - 1);
        for c in 0..n {
            let i = box_side * count::<T>(c) / count::<T>(n - 1);
            if p.line_value(e, i) >= T::zero() && !excluded(e, i) {
                lock.offer(vdot(p, p.gamma_l, a_l, e, i), e, i);
            }
        }
    }
    // Refinement of the lockdown side near the sliding segment.
    for r in 0..n {
        let e = e_max * lit(2.0) * count::<T>(r) / count::<T>(n - 1);
        for c in 0..n {
            let i = i_max * lit(2.0) * count::<T>(c) / count::<T>(n - 1);
            if p.line_value(e, i) >= T::zero() && !excluded(e, i) {
                lock.offer(vdot(p, p.gamma_l, a_l, e, i), e, i);
            }
        }
    }

    // The sliding line E = E0 - m x, I = I0 + x: uniform plus log-spaced near x = 0.
    let m = (p.lambda - d) / eps;
    let x_lo = -p.i0;
    let x_hi = d / (p.lambda - d) * p.i0;
    let mut xs: Vec<T> = Vec::new();
    let line_n = 20 * n;
    for k in 0..line_n {
        xs.push(x_lo + (x_hi - x_lo) * count::<T>(k) / count::<T>(line_n - 1));
    }
    for k in 0..=400 {
        let mag = p.i0 * lit::<T>(10f64.powf(-4.0 + 4.0 * k as f64 / 400.0));
        if mag <= x_hi {
            xs.push(mag);
        }
        if -mag >= x_lo {
            xs.push(-mag);
        }
    }
    for &x in &xs {
        let (e, i) = (e0 - m * x, i0 + x);
        if excluded(e, i) || e < T::zero() || i < T::zero() {
            continue;
        }
        free.offer(vdot(p, p.gamma_f, a_f, e, i), e, i);
        lock.offer(vdot(p, p.gamma_l, a_l, e, i), e, i);
    }

    Ok(VdotCertificate {
        grid_density: n,
        line_samples: xs.len(),
        exclusion_radius: excl,
        lock_radius,
        a_f,
        a_l,
        max_vdot_free: free.max,
        argmax_free: free.at,
        max_vdot_lock: lock.max,
        argmax_lock: lock.at,
        pass: free.max < T::zero() && lock.max < T::zero(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport<T> {
    /// `(time, I - I0)` of every crossing before sliding, in time order.
    pub crossings: Vec<(T, T)>,
    pub holds: bool,
}

/// Checks that `|I - I0|` strictly shrinks from each crossing to the next.
/// Fewer than two crossings pass vacuously.
pub fn contraction_probe<T: Real>(
    traj: &Trajectory<T>,
    i_component: usize,
    i0: T,
) -> ContractionReport<T> {
    let seq = crossing_sequence(traj, i_component, i0);
    let crossings: Vec<(T, T)> = seq.ordered.iter().map(|&(t, i)| (t, i - i0)).collect();
    let holds = crossings.windows(2).all(|w| w[1].1.abs() < w[0].1.abs());
    ContractionReport { crossings, holds }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub chain: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalReport<T> {
    pub params: GlobalParams<T>,
    pub lambda_fr: T,
    pub w_fr: [T; 2],
    pub i_fr: T,
    pub i_fr_lock: Option<T>,
    pub line_kind: LineKind,
    /// `None` for a half line (`I_MAX = +inf`).
    pub i_max: Option<T>,
    pub i_one: Option<T>,
    pub i_two: Option<T>,
    pub lambda_1: T,
    pub lambda_2: T,
    pub lambda_3: T,
    pub lambda_4: T,
    pub regime_free: FreeRegime,
    pub regime_lock: LockRegime,
    pub case: AttractiveCase,
    pub sliding_zone: SlidingZone<T>,
    pub multiple_crossings_possible: bool,
    pub max_crossings: Option<u32>,
    pub a_f: Option<T>,
    pub a_l: Option<T>,
    pub orderings: Vec<OrderingCheck>,
}

impl<T: Real> GlobalReport<T> {
    pub fn orderings_hold(&self) -> bool {
        self.orderings.iter().all(|o| o.holds)
    }
}

fn chain<T: Real>(names: &str, values: &[Option<T>]) -> OrderingCheck {
    let holds = values.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => a > b,
        _ => false,
    });
    OrderingCheck { chain: names.to_string(), holds }
}

/// Runs every classification and collects the orderings implied by the case.
pub fn analyze<T: Real>(p: &GlobalParams<T>) -> Result<GlobalReport<T>> {
    p.validate()?;
    let fr = frobenius_free(p)?;
    let (i_max, line_kind) = sliding_line_geometry(p);
    let (regime_free, i_one) = flow_free_regime(p);
    let (regime_lock, i_two) = flow_lock_regime(p);
    let zone = attractive_zone(p);
    let (l1, l2) = free_roots(p);
    let (l3, l4) = lock_roots(p);
    let coeffs = lyapunov_coeffs(p).ok();
    let zero = Some(T::zero());
    let inf_or = |v: Option<T>| v.or(Some(T::infinity()));
    let mut orderings = vec![OrderingCheck {
        chain: "I0 > I_FR > 0".into(),
        holds: p.i0 > fr.i_fr && fr.i_fr > T::zero(),
    }];
    match zone.case {
        AttractiveCase::MultipleCrossings => orderings.push(chain(
            "I_MAX > I1 > I0 > I2 > I_FR > 0",
            &[inf_or(i_max), i_one, Some(p.i0), i_two, Some(fr.i_fr), zero],
        )),
        AttractiveCase::AtMostTwoCrossings => orderings.push(chain(
            "I_MAX > I2 > I0 > I_FR > I1 > 0",
            &[inf_or(i_max), i_two, Some(p.i0), Some(fr.i_fr), i_one, zero],
        )),
        _ => {}
    }
    if let Some((a_f, a_l)) = coeffs {
        if p.gamma_l < p.delta && p.delta < p.gamma_f {
            orderings.push(OrderingCheck {
                chain: "a_F > 1 > a_L > 0".into(),
                holds: a_f > T::one() && T::one() > a_l && a_l > T::zero(),
            });
        }
    }
    Ok(GlobalReport {
        params: *p,
        lambda_fr: fr.lambda_fr,
        w_fr: fr.w_fr,
        i_fr: fr.i_fr,
        i_fr_lock: frobenius_lock_intersection(p),
        line_kind,
        i_max,
        i_one,
        i_two,
        lambda_1: l1,
        lambda_2: l2,
        lambda_3: l3,
        lambda_4: l4,
        regime_free,
        regime_lock,
        case: zone.case,
        sliding_zone: zone.zone,
        multiple_crossings_possible: zone.multiple_crossings_possible,
        max_crossings: zone.max_crossings,
        a_f: coeffs.map(|c| c.0),
        a_l: coeffs.map(|c| c.1),
        orderings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lockdown_case(gamma_l: f64) -> GlobalParams<f64> {
        GlobalParams::new(0.8, gamma_l, 0.2, 0.2, 1.0, 1e-3).unwrap()
    }

    fn multi_crossing_case() -> GlobalParams<f64> {
        GlobalParams::new(0.065, 0.03, 0.05, 0.2, 10.0, 2e-3).unwrap()
    }

    #[test]
    fn frobenius_examples() {
        let fr = frobenius_free(&lockdown_case(0.15)).unwrap();
        assert!((fr.lambda_fr - 0.2).abs() < 1e-15);
        assert!((fr.i_fr - 1e-3 / 1.2).abs() < 1e-15);
        let fr = frobenius_free(&multi_crossing_case()).unwrap();
        assert!((fr.lambda_fr - (-0.25 + 0.0745f64.sqrt()) / 2.0).abs() < 1e-15);
        let p = GlobalParams::new(0.2, 0.1, 0.2, 0.2, 1.0, 1e-3).unwrap();
        assert!(matches!(frobenius_free(&p), Err(GlobalError::Degenerate { .. })));
    }

    #[test]
    fn frobenius_vector_is_eigenvector() {
        let p = multi_crossing_case();
        let fr = frobenius_free(&p).unwrap();
        let f = [[-p.epsilon, p.gamma_f], [p.epsilon, -p.delta]];
        for r in 0..2 {
            let lhs = f[r][0] * fr.w_fr[0] + f[r][1] * fr.w_fr[1];
            assert!((lhs - fr.lambda_fr * fr.w_fr[r]).abs() < 1e-12);
        }
        assert!(p.line_value(fr.e_fr, fr.i_fr).abs() < 1e-15);
    }

    #[test]
    fn geometry_examples() {
        let (m, k) = sliding_line_geometry(&lockdown_case(0.15));
        assert!((m.unwrap() - 1.25e-3).abs() < 1e-15);
        assert_eq!(k, LineKind::Segment);
        let p = GlobalParams::new(0.8, 0.15, 0.2, 0.2, 0.2, 1e-3).unwrap();
        assert_eq!(sliding_line_geometry(&p), (None, LineKind::HalfLine));
        let (m, _) = sliding_line_geometry(&multi_crossing_case());
        assert!((m.unwrap() - 10.0 / 9.95 * 2e-3).abs() < 1e-15);
    }

    #[test]
    fn free_regimes() {
        assert_eq!(flow_free_regime(&multi_crossing_case()).0, FreeRegime::BelowI1);
        assert_eq!(flow_free_regime(&lockdown_case(0.15)).0, FreeRegime::Any);
        let p = GlobalParams::new(0.8, 0.15, 0.2, 0.2, 0.3, 1e-3).unwrap();
        assert_eq!(flow_free_regime(&p).0, FreeRegime::AboveI1);
    }

    #[test]
    fn lock_regimes() {
        let (r, i2) = flow_lock_regime(&lockdown_case(0.15));
        assert_eq!(r, LockRegime::AboveI2);
        assert!((i2.unwrap() - 0.6 / 0.61 * 1e-3).abs() < 1e-15);
        // delta + (eps/delta) gamma_L = 0.35 <= 0.38 <= 0.4
        let p = GlobalParams::new(0.8, 0.15, 0.2, 0.2, 0.38, 1e-3).unwrap();
        assert_eq!(flow_lock_regime(&p).0, LockRegime::Any);
        let p = GlobalParams::new(0.8, 0.2, 0.2, 0.2, 1.0, 1e-3).unwrap();
        assert_eq!(flow_lock_regime(&p).0, LockRegime::NotApplicable);
        let (l3, l4) = lock_roots(&lockdown_case(0.15));
        assert!(0.0 < l4 && l4 < 0.2 && 0.2 < l3 && l3 < 0.4);
    }

    #[test]
    fn zones() {
        let z = attractive_zone(&multi_crossing_case());
        assert!(z.multiple_crossings_possible);
        let (_, i1) = flow_free_regime(&multi_crossing_case());
        let (_, i2) = flow_lock_regime(&multi_crossing_case());
        assert_eq!(z.zone, SlidingZone::Interval { lo: i2.unwrap(), hi: i1.unwrap() });
        let z = attractive_zone(&lockdown_case(0.15));
        assert!(!z.multiple_crossings_possible);
        assert_eq!(z.max_crossings, Some(1));
        let p = GlobalParams::new(0.8, 0.15, 0.2, 0.2, 0.01, 1e-3).unwrap();
        let (_, l4) = lock_roots(&p);
        assert!(0.01 < l4);
        assert_eq!(attractive_zone(&p).case, AttractiveCase::AtMostOneCrossingSlow);
    }

    #[test]
    fn lyapunov_coefficient_examples() {
        let (a_f, _) = lyapunov_coeffs(&multi_crossing_case()).unwrap();
        assert!((a_f - (0.0025 + 0.065 * 9.95) / 0.5).abs() < 1e-14);
        let (_, a_l) = lyapunov_coeffs(&lockdown_case(0.15)).unwrap();
        assert!((a_l - 0.8).abs() < 1e-15);
        let p = GlobalParams::new(0.8, 0.2 - 1e-9, 0.2, 0.2, 1.0, 1e-3).unwrap();
        let want: f64 = (0.04 + 0.8 * 0.8) / 0.2;
        assert!((lyapunov_coeffs(&p).unwrap().0 - want).abs() < 1e-14);
        let p = GlobalParams::new(0.8, 0.15, 0.2, 0.2, 0.2, 1e-3).unwrap();
        assert_eq!(lyapunov_coeffs(&p), Err(GlobalError::NotApplicable));
    }

    #[test]
    fn gamma_equal_delta_gives_unit_a() {
        let p = GlobalParams::new(0.2, 0.1, 0.2, 0.3, 1.7, 1e-3).unwrap();
        let (a_f, _) = lyapunov_coeffs(&p).unwrap();
        assert_eq!(a_f, 1.0);
    }

    #[test]
    fn vdot_vanishes_at_origin_and_equilibrium() {
        let p = multi_crossing_case();
        let (a_f, a_l) = lyapunov_coeffs(&p).unwrap();
        let (e0, i0) = p.x_eq();
        for (g, a) in [(p.gamma_f, a_f), (p.gamma_l, a_l)] {
            assert_eq!(vdot(&p, g, a, 0.0, 0.0), 0.0);
            assert!(vdot(&p, g, a, e0, i0).abs() < 1e-20);
        }
    }

    #[test]
    fn certificate_and_negative_control() {
        let p = multi_crossing_case();
        let cert = certify_vdot_negative(&p, 200, None).unwrap();
        assert!(cert.pass, "{cert:?}");
        let (a_f, a_l) = lyapunov_coeffs(&p).unwrap();
        let bad = certify_vdot_negative(&p, 200, Some((a_f + 0.5, a_l + 0.5))).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn multi_crossing_report_orderings() {
        let r = analyze(&multi_crossing_case()).unwrap();
        assert_eq!(r.case, AttractiveCase::MultipleCrossings);
        assert!(r.orderings_hold(), "{:?}", r.orderings);
        assert!(r.i_fr < r.params.i0);
    }

    #[test]
    fn report_serializes_infinite_i_max_as_null() {
        let p = GlobalParams::new(0.8, 0.15, 0.2, 0.2, 0.2, 1e-3).unwrap();
        let r = analyze(&p).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["i_max"].is_null());
        assert_eq!(v["line_kind"], "HALF_LINE");
    }
}
