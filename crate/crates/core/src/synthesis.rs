//! Controller synthesis for the constrained-gain loop
//! `x' = F x + g u`, `u = H x gamma(t)` with `gamma(t)` in `I1 ∪ I2`.
//!
//! The pipeline is: [`check_feasibility`] (controllability plus the sign of
//! `det(F + gH i1_hi) det(F + gH i2_lo)`), [`compute_gamma0`],
//! [`compute_x_eq`], [`compute_k`]; [`synthesize`] chains all four.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, char_poly, companion_pair, controllability_matrix, det, dot, hurwitz_test,
    lyapunov_solve, norm2, null_vector, rank, solve, symmetric_eigen_bounds, LinalgError,
    Matrix, Poly,
};
use crate::num::{default_rank_tol, lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid plant: {0}")]
    InvalidPlant(String),
    #[error("invalid gain intervals: {0}")]
    InvalidIntervals(String),
    #[error("plant is not controllable")]
    NotControllable,
    #[error("determinant does not change sign on the gain bracket")]
    NoSignChange,
    #[error("det(F + gH gamma0) = {0:e} fails verification")]
    Gamma0Check(f64),
    #[error("setpoint must be positive")]
    NonPositiveSetpoint,
    #[error("normalizing component of the equilibrium direction vanishes")]
    ZeroNormalization,
    #[error("sliding polynomial must have degree {expected}, got {got}")]
    DeltaDegree { expected: usize, got: usize },
    #[error("sliding polynomial must be monic")]
    DeltaNotMonic,
    #[error("sliding polynomial is not Hurwitz")]
    DeltaNotHurwitz,
    #[error("F is not Hurwitz")]
    NotHurwitz,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("external gain trace exhausted")]
    TraceExhausted,
    #[error("external gain {value} lies outside the selected interval")]
    TraceOutOfInterval { value: f64 },
    #[error("plant is infeasible: {0:?}")]
    Infeasible(FeasibilityReport<f64>),
}

pub type Result<T> = std::result::Result<T, SynthesisError>;

/// The constrained-feedback linear system `(F, g, H)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Plant<T> {
    pub f: Matrix<T>,
    pub g: Vec<T>,
    pub h: Vec<T>,
}

impl<T: Real> Plant<T> {
    pub fn new(f: Matrix<T>, g: Vec<T>, h: Vec<T>) -> Result<Self> {
        let plant = Self { f, g, h };
        plant.validate()?;
        Ok(plant)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.f.rows();
        if !self.f.is_square() {
            return Err(SynthesisError::InvalidPlant("F must be square".into()));
        }
        if self.g.len() != n || self.h.len() != n {
            return Err(SynthesisError::InvalidPlant(format!(
                "g and H must have length {n}"
            )));
        }
        let finite = self.f.is_finite()
            && self.g.iter().chain(&self.h).all(|x| x.is_finite());
        if !finite {
            return Err(SynthesisError::InvalidPlant("non-finite entry".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.f.rows()
    }

    /// `F + g H gamma`.
    pub fn closed_loop(&self, gamma: T) -> Matrix<T> {
        self.f
            .rank_one_update(gamma, &self.g, &self.h)
            .expect("plant dimensions validated")
    }

    pub fn det_at(&self, gamma: T) -> T {
        det(&self.closed_loop(gamma)).expect("square")
    }

    pub fn is_controllable(&self) -> bool {
        let r = controllability_matrix(&self.f, &self.g).expect("plant dimensions validated");
        rank(&r, default_rank_tol()) == self.dim()
    }
}

/// Disjoint gain intervals `I1 = [i1_lo, i1_hi]`, `I2 = [i2_lo, i2_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainIntervals<T> {
    pub i1_lo: T,
    pub i1_hi: T,
    pub i2_lo: T,
    pub i2_hi: T,
}

impl<T: Real> GainIntervals<T> {
    pub fn new(i1_lo: T, i1_hi: T, i2_lo: T, i2_hi: T) -> Result<Self> {
        let gains = Self { i1_lo, i1_hi, i2_lo, i2_hi };
        gains.validate()?;
        Ok(gains)
    }

    /// Two single values, the classic switch between exactly two gains.
    pub fn two_levels(low: T, high: T) -> Result<Self> {
        Self::new(low, low, high, high)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.i1_lo, self.i1_hi, self.i2_lo, self.i2_hi];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(SynthesisError::InvalidIntervals("non-finite bound".into()));
        }
        if !(self.i1_lo <= self.i1_hi && self.i1_hi < self.i2_lo && self.i2_lo <= self.i2_hi) {
            return Err(SynthesisError::InvalidIntervals(
                "need i1_lo <= i1_hi < i2_lo <= i2_hi".into(),
            ));
        }
        Ok(())
    }

    pub fn bounds(&self, choice: IntervalChoice) -> (T, T) {
        match choice {
            IntervalChoice::I1 => (self.i1_lo, self.i1_hi),
            IntervalChoice::I2 => (self.i2_lo, self.i2_hi),
        }
    }

    pub fn contains(&self, choice: IntervalChoice, gamma: T) -> bool {
        let (lo, hi) = self.bounds(choice);
        lo <= gamma && gamma <= hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailureReason {
    NotControllable,
    DetProductNonnegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport<T> {
    pub controllable: bool,
    pub det_at_i1_hi: T,
    pub det_at_i2_lo: T,
    pub det_product: T,
    pub feasible: bool,
    pub failure_reason: Option<FailureReason>,
}

impl<T: Real> FeasibilityReport<T> {
    pub fn to_f64(&self) -> FeasibilityReport<f64> {
        FeasibilityReport {
            controllable: self.controllable,
            det_at_i1_hi: to_f64(self.det_at_i1_hi),
            det_at_i2_lo: to_f64(self.det_at_i2_lo),
            det_product: to_f64(self.det_product),
            feasible: self.feasible,
            failure_reason: self.failure_reason,
        }
    }
}

/// Checks both existence conditions; infeasibility is reported, not raised.
pub fn check_feasibility<T: Real>(
    plant: &Plant<T>,
    gains: &GainIntervals<T>,
) -> FeasibilityReport<T> {
    let controllable = plant.is_controllable();
    let det_at_i1_hi = plant.det_at(gains.i1_hi);
    let det_at_i2_lo = plant.det_at(gains.i2_lo);
    let det_product = det_at_i1_hi * det_at_i2_lo;
    let failure_reason = if !controllable {
        Some(FailureReason::NotControllable)
    } else if !(det_product < T::zero()) {
        Some(FailureReason::DetProductNonnegative)
    } else {
        None
    };
    FeasibilityReport {
        controllable,
        det_at_i1_hi,
        det_at_i2_lo,
        det_product,
        feasible: failure_reason.is_none(),
        failure_reason,
    }
}

/// Root of the affine map `gamma -> det(F + gH gamma)` from its values at
/// `a` and `b`. `None` when the map is constant.
pub fn affine_det_root<T: Real>(plant: &Plant<T>, a: T, b: T) -> Option<T> {
    let da = plant.det_at(a);
    let db = plant.det_at(b);
    if da == db {
        return None;
    }
    Some(a + (b - a) * da / (da - db))
}

/// The unique `gamma0 ∈ (i1_hi, i2_lo)` with `det(F + gH gamma0) = 0`.
///
/// `det(F + gH gamma)` is affine in `gamma` (rank-one update), so two
/// evaluations give the root exactly up to rounding; no iteration.
pub fn compute_gamma0<T: Real>(plant: &Plant<T>, gains: &GainIntervals<T>) -> Result<T> {
    let (a, b) = (gains.i1_hi, gains.i2_lo);
    let da = plant.det_at(a);
    let db = plant.det_at(b);
    if !(da * db < T::zero()) {
        return Err(SynthesisError::NoSignChange);
    }
    let gamma0 = a + (b - a) * da / (da - db);
    let check = plant.det_at(gamma0);
    if check.abs() > default_rank_tol::<T>() * da.abs().max(db.abs()) {
        return Err(SynthesisError::Gamma0Check(to_f64(check)));
    }
    Ok(gamma0)
}

/// How the equilibrium direction is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XeqNormalization {
    /// `H x_eq = setpoint`.
    #[default]
    Output,
    /// `x_eq[i] = setpoint`.
    Component(usize),
}

/// Equilibrium `x_eq` spanning the kernel of `F + gH gamma0`, scaled per
/// `normalization`.
pub fn compute_x_eq<T: Real>(
    plant: &Plant<T>,
    gamma0: T,
    setpoint: T,
    normalization: XeqNormalization,
) -> Result<Vec<T>> {
    if !(setpoint > T::zero()) {
        return Err(SynthesisError::NonPositiveSetpoint);
    }
    let v = null_vector(&plant.closed_loop(gamma0), default_rank_tol())?;
    let reference = match normalization {
        XeqNormalization::Output => {
            let hv = dot(&plant.h, &v);
            // H x_eq = 0 would contradict invertibility at the interval ends.
            if hv.abs() <= lit::<T>(1e-12) * norm2(&plant.h) {
                return Err(SynthesisError::ZeroNormalization);
            }
            hv
        }
        XeqNormalization::Component(i) => {
            let vi = *v.get(i).ok_or_else(|| {
                SynthesisError::InvalidParameter(format!("component {i} out of range"))
            })?;
            if vi.abs() <= lit(1e-12) {
                return Err(SynthesisError::ZeroNormalization);
            }
            vi
        }
    };
    Ok(v.iter().map(|&x| x * setpoint / reference).collect())
}

/// Sliding-surface row `K = K_c R_c R^{-1}` with
/// `K_c = [-Δ0, ..., -Δ_{n-2}, -1]`, so that motion on `K x = K x_eq` has
/// characteristic polynomial `delta`.
pub fn compute_k<T: Real>(plant: &Plant<T>, delta: &Poly<T>) -> Result<Vec<T>> {
    let n = plant.dim();
    if delta.degree() != n - 1 {
        return Err(SynthesisError::DeltaDegree { expected: n - 1, got: delta.degree() });
    }
    if !delta.is_monic() {
        return Err(SynthesisError::DeltaNotMonic);
    }
    if !hurwitz_test(delta)? {
        return Err(SynthesisError::DeltaNotHurwitz);
    }
    if !plant.is_controllable() {
        return Err(SynthesisError::NotControllable);
    }
    let r = controllability_matrix(&plant.f, &plant.g)?;
    let (fc, gc) = companion_pair(&char_poly(&plant.f)?)?;
    let rc = controllability_matrix(&fc, &gc)?;
    let kc: Vec<T> = (0..n).map(|i| -delta.coeff(i)).collect();
    let target = rc.vec_mul(&kc)?;
    // K R = K_c R_c  <=>  R^T K^T = (K_c R_c)^T
    Ok(solve(&r.transpose(), &target)?)
}

/// A synthesized sliding-mode controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Controller<T> {
    pub k: Vec<T>,
    pub x_eq: Vec<T>,
    pub gamma0: T,
    pub sign_h_xeq: i8,
    pub delta_poly: Poly<T>,
}

impl<T: Real> Controller<T> {
    pub fn dim(&self) -> usize {
        self.k.len()
    }
}

/// Runs the whole pipeline; an infeasible plant is an error carrying the report.
pub fn synthesize<T: Real>(
    plant: &Plant<T>,
    gains: &GainIntervals<T>,
    delta: &Poly<T>,
    setpoint: T,
    normalization: XeqNormalization,
) -> Result<(FeasibilityReport<T>, Controller<T>)> {
    plant.validate()?;
    gains.validate()?;
    let report = check_feasibility(plant, gains);
    if !report.feasible {
        return Err(SynthesisError::Infeasible(report.to_f64()));
    }
    let gamma0 = compute_gamma0(plant, gains)?;
    let x_eq = compute_x_eq(plant, gamma0, setpoint, normalization)?;
    let k = compute_k(plant, delta)?;
    let h_xeq = dot(&plant.h, &x_eq);
    let controller = Controller {
        k,
        x_eq,
        gamma0,
        sign_h_xeq: if h_xeq < T::zero() { -1 } else { 1 },
        delta_poly: delta.clone(),
    };
    Ok((report, controller))
}

/// `sign(H x_eq) K (x - x_eq)`: negative selects `I1`, positive `I2`.
pub fn switching_sigma<T: Real>(ctrl: &Controller<T>, x: &[T]) -> T {
    let s = ctrl
        .k
        .iter()
        .zip(x.iter().zip(&ctrl.x_eq))
        .fold(T::zero(), |acc, (&k, (&xi, &xe))| acc + k * (xi - xe));
    if ctrl.sign_h_xeq < 0 {
        -s
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntervalChoice {
    I1,
    I2,
}

/// Hysteretic interval choice: `I1` below `-band`, `I2` above `+band`,
/// otherwise keep `previous` (`I2` when there is none).
pub fn hysteresis_choice<T: Real>(
    sigma: T,
    previous: Option<IntervalChoice>,
    band: T,
) -> IntervalChoice {
    if sigma < -band {
        IntervalChoice::I1
    } else if sigma > band {
        IntervalChoice::I2
    } else {
        previous.unwrap_or(IntervalChoice::I2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SelectionPolicy {
    LowerEndpoint,
    UpperEndpoint,
    Midpoint,
    RandomUniform,
    ExternalTrace,
}

/// Picks a gain inside the active interval.
///
/// `RandomUniform` owns a seeded generator, so a selector must not be shared
/// between simulations that should be independent.
#[derive(Debug, Clone)]
pub struct GainSelector<T> {
    policy: SelectionPolicy,
    seed: Option<u64>,
    rng: Option<ChaCha8Rng>,
    trace: Vec<T>,
    cursor: usize,
}

impl<T: Real> GainSelector<T> {
    pub fn new(policy: SelectionPolicy) -> Self {
        let rng = (policy == SelectionPolicy::RandomUniform).then(|| ChaCha8Rng::seed_from_u64(0));
        Self { policy, seed: rng.as_ref().map(|_| 0), rng, trace: Vec::new(), cursor: 0 }
    }

    pub fn random(seed: u64) -> Self {
        Self {
            policy: SelectionPolicy::RandomUniform,
            seed: Some(seed),
            rng: Some(ChaCha8Rng::seed_from_u64(seed)),
            trace: Vec::new(),
            cursor: 0,
        }
    }

    pub fn external(trace: Vec<T>) -> Self {
        Self { policy: SelectionPolicy::ExternalTrace, seed: None, rng: None, trace, cursor: 0 }
    }

    pub fn policy(&self) -> SelectionPolicy {
        self.policy
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Applies the hysteretic switching rule to `sigma`, then draws a gain
    /// from the chosen interval according to the policy.
    pub fn select_gain(
        &mut self,
        gains: &GainIntervals<T>,
        sigma: T,
        previous: Option<IntervalChoice>,
        hysteresis_band: T,
    ) -> Result<(IntervalChoice, T)> {
        if hysteresis_band < T::zero() {
            return Err(SynthesisError::InvalidParameter("negative hysteresis band".into()));
        }
        let choice = hysteresis_choice(sigma, previous, hysteresis_band);
        let (lo, hi) = gains.bounds(choice);
        let gamma = match self.policy {
            SelectionPolicy::LowerEndpoint => lo,
            SelectionPolicy::UpperEndpoint => hi,
            SelectionPolicy::Midpoint => (lo + hi) / lit(2.0),
            SelectionPolicy::RandomUniform => {
                let rng = self.rng.as_mut().expect("random policy owns a generator");
                let u: f64 = rng.gen();
                let g = lo + (hi - lo) * lit(u);
                g.max(lo).min(hi)
            }
            SelectionPolicy::ExternalTrace => {
                let value = *self.trace.get(self.cursor).ok_or(SynthesisError::TraceExhausted)?;
                self.cursor += 1;
                if !gains.contains(choice, value) {
                    return Err(SynthesisError::TraceOutOfInterval { value: to_f64(value) });
                }
                value
            }
        };
        Ok((choice, gamma))
    }
}

/// Invariant-ball data for `x' = F x + g u` with `|u| <= u_max`, `F` Hurwitz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaBound<T> {
    pub p: Matrix<T>,
    pub mu: T,
    pub u_max: T,
    /// Gain-to-radius constant `2 mu |P g| sqrt(lmax(P) / lmin(P))`.
    pub a: T,
    pub radius: T,
}

pub fn lemma_invariant_bound<T: Real>(
    f: &Matrix<T>,
    g: &[T],
    u_max: T,
    mu: T,
) -> Result<LemmaBound<T>> {
    if !(u_max >= T::zero()) {
        return Err(SynthesisError::InvalidParameter("u_max must be >= 0".into()));
    }
    if !(mu > T::one()) {
        return Err(SynthesisError::InvalidParameter("mu must exceed 1".into()));
    }
    if !linalg::is_hurwitz_matrix(f)? {
        return Err(SynthesisError::NotHurwitz);
    }
    let p = lyapunov_solve(f)?;
    // max over unit v of v^T P g is attained at v = Pg / |Pg|.
    let pg_norm = norm2(&p.mul_vec(g)?);
    let (lmin, lmax) = symmetric_eigen_bounds(&p)?;
    let a = lit::<T>(2.0) * mu * pg_norm * (lmax / lmin).sqrt();
    Ok(LemmaBound { p, mu, u_max, a, radius: a * u_max })
}

/// Default `mu` for [`lemma_invariant_bound`].
pub const DEFAULT_LEMMA_MU: f64 = 1.05;
