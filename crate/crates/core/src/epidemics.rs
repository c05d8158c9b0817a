//! SEIR, SAIR and SEAIR models driven by a switched contact rate.
//!
//! Each model is reduced to the linear framework of [`crate::synthesis`] by
//! treating `gamma(t) = beta(t) S(t)` as the constrained gain acting on the
//! infected compartments (`(E, I)`, `(A, I)` or `(E, A, I)`). The contact
//! rate switches between `beta_lock` (interval `I1`) and `beta_free`
//! (interval `I2`).
//!
//! State vectors are ordered `[S, E, I, R]`, `[S, A, I, R]` and
//! `[S, E, A, I, R]` respectively.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, hurwitz_test, Matrix, Poly};
use crate::num::{lit, Real};
use crate::sim::{
    simulate_nonlinear, FeedbackLaw, SimConfig, SimError, SwitchedDynamics, Trajectory,
};
use crate::synthesis::{
    affine_det_root, compute_k, compute_x_eq, hysteresis_choice, Controller, IntervalChoice,
    Plant, SynthesisError, XeqNormalization,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpidemicError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T> = std::result::Result<T, EpidemicError>;

/// Largest violation of nonnegativity or of the unit sum tolerated in a state.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeirParams<T> {
    pub beta_lock: T,
    pub beta_free: T,
    pub delta: T,
    pub epsilon: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SairParams<T> {
    pub beta_lock: T,
    pub beta_free: T,
    pub delta: T,
    pub eps1: T,
    pub eps2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeairParams<T> {
    pub beta_lock: T,
    pub beta_free: T,
    pub delta: T,
    pub epsilon: T,
    pub eps1: T,
    pub eps2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EpidemicModel<T> {
    Seir(SeirParams<T>),
    Sair(SairParams<T>),
    Seair(SeairParams<T>),
}

impl<T: Real> EpidemicModel<T> {
    pub fn validate(&self) -> Result<()> {
        let rates: Vec<T> = match *self {
            Self::Seir(p) => vec![p.beta_lock, p.beta_free, p.delta, p.epsilon],
            Self::Sair(p) => vec![p.beta_lock, p.beta_free, p.delta, p.eps1, p.eps2],
            Self::Seair(p) => vec![p.beta_lock, p.beta_free, p.delta, p.epsilon, p.eps1, p.eps2],
        };
        if rates.iter().any(|r| !(r.is_finite() && *r > T::zero())) {
            return Err(EpidemicError::InvalidParams("all rates must be positive".into()));
        }
        let (bl, bf) = self.betas();
        if !(bl < bf) {
            return Err(EpidemicError::InvalidParams("need beta_lock < beta_free".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Seir(_) => "seir",
            Self::Sair(_) => "sair",
            Self::Seair(_) => "seair",
        }
    }

    /// `(beta_lock, beta_free)`.
    pub fn betas(&self) -> (T, T) {
        match *self {
            Self::Seir(p) => (p.beta_lock, p.beta_free),
            Self::Sair(p) => (p.beta_lock, p.beta_free),
            Self::Seair(p) => (p.beta_lock, p.beta_free),
        }
    }

    pub fn delta(&self) -> T {
        match *self {
            Self::Seir(p) => p.delta,
            Self::Sair(p) => p.delta,
            Self::Seair(p) => p.delta,
        }
    }

    pub fn with_betas(mut self, beta_lock: T, beta_free: T) -> Self {
        match &mut self {
            Self::Seir(p) => (p.beta_lock, p.beta_free) = (beta_lock, beta_free),
            Self::Sair(p) => (p.beta_lock, p.beta_free) = (beta_lock, beta_free),
            Self::Seair(p) => (p.beta_lock, p.beta_free) = (beta_lock, beta_free),
        }
        self
    }

    pub fn compartments(&self) -> &'static [&'static str] {
        match self {
            Self::Seir(_) => &["S", "E", "I", "R"],
            Self::Sair(_) => &["S", "A", "I", "R"],
            Self::Seair(_) => &["S", "E", "A", "I", "R"],
        }
    }

    pub fn dim(&self) -> usize {
        self.compartments().len()
    }

    /// Position of `I` in the full state.
    pub fn i_index(&self) -> usize {
        self.dim() - 2
    }

    /// Dimension of the reduced linear plant (the infected compartments).
    pub fn reduced_dim(&self) -> usize {
        self.dim() - 2
    }

    /// The infected compartments `x[1..n-1]`.
    pub fn reduced_state<'a>(&self, x: &'a [T]) -> &'a [T] {
        &x[1..self.dim() - 1]
    }

    /// Force of infection divided by `beta S`.
    fn infectious(&self, x: &[T]) -> T {
        match self {
            Self::Seir(_) => x[2],
            Self::Sair(_) => x[1] + x[2],
            Self::Seair(_) => x[2] + x[3],
        }
    }

    /// Compartments of the disease-free state `S = 1`.
    pub fn disease_free(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.dim()];
        x[0] = T::one();
        x
    }

    /// Checks nonnegativity and unit sum within [`SIMPLEX_TOL`].
    pub fn check_simplex(&self, x: &[T]) -> std::result::Result<(), String> {
        if x.len() != self.dim() {
            return Err(format!("expected {} compartments, got {}", self.dim(), x.len()));
        }
        let tol: T = lit(SIMPLEX_TOL);
        for (name, &v) in self.compartments().iter().zip(x) {
            if !v.is_finite() || v < -tol {
                return Err(format!("compartment {name} = {v:?} is negative"));
            }
        }
        let sum = x.iter().fold(T::zero(), |a, &v| a + v);
        if (sum - T::one()).abs() > tol {
            return Err(format!("compartments sum to {sum:?}"));
        }
        Ok(())
    }
}

/// Right-hand side of the model at contact rate `beta`. Components sum to zero.
pub fn derivatives<T: Real>(model: &EpidemicModel<T>, x: &[T], beta: T) -> Vec<T> {
    let mut out = vec![T::zero(); model.dim()];
    write_derivatives(model, x, beta, &mut out);
    out
}

fn write_derivatives<T: Real>(model: &EpidemicModel<T>, x: &[T], beta: T, out: &mut [T]) {
    let infection = beta * x[0] * model.infectious(x);
    match *model {
        EpidemicModel::Seir(p) => {
            let (e, i) = (x[1], x[2]);
            out[0] = -infection;
            out[1] = infection - p.epsilon * e;
            out[2] = p.epsilon * e - p.delta * i;
            out[3] = p.delta * i;
        }
        EpidemicModel::Sair(p) => {
            let (a, i) = (x[1], x[2]);
            out[0] = -infection;
            out[1] = infection - (p.eps1 + p.eps2) * a;
            out[2] = p.eps1 * a - p.delta * i;
            out[3] = p.eps2 * a + p.delta * i;
        }
        EpidemicModel::Seair(p) => {
            let (e, a, i) = (x[1], x[2], x[3]);
            out[0] = -infection;
            out[1] = infection - p.epsilon * e;
            out[2] = p.epsilon * e - (p.eps1 + p.eps2) * a;
            out[3] = p.eps1 * a - p.delta * i;
            out[4] = p.eps2 * a + p.delta * i;
        }
    }
}

/// `(F, g, H)` acting on the infected compartments with `gamma = beta S`.
pub fn reduced_plant<T: Real>(model: &EpidemicModel<T>) -> Plant<T> {
    let z = T::zero();
    let o = T::one();
    let (f, g, h) = match *model {
        EpidemicModel::Seir(p) => (
            vec![vec![-p.epsilon, z], vec![p.epsilon, -p.delta]],
            vec![o, z],
            vec![z, o],
        ),
        EpidemicModel::Sair(p) => (
            vec![vec![-(p.eps1 + p.eps2), z], vec![p.eps1, -p.delta]],
            vec![o, z],
            vec![o, o],
        ),
        EpidemicModel::Seair(p) => (
            vec![
                vec![-p.epsilon, z, z],
                vec![p.epsilon, -(p.eps1 + p.eps2), z],
                vec![z, p.eps1, -p.delta],
            ],
            vec![o, z, z],
            vec![z, o, o],
        ),
    };
    Plant { f: Matrix::from_rows(&f).expect("square by construction"), g, h }
}

/// The value of `beta S` at which the reduced plant loses invertibility:
/// `delta` for SEIR, `delta (eps1 + eps2) / (delta + eps1)` otherwise.
pub fn condition_threshold<T: Real>(model: &EpidemicModel<T>) -> T {
    match *model {
        EpidemicModel::Seir(p) => p.delta,
        EpidemicModel::Sair(SairParams { delta, eps1, eps2, .. })
        | EpidemicModel::Seair(SeairParams { delta, eps1, eps2, .. }) => {
            delta * (eps1 + eps2) / (delta + eps1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditionStatus {
    Feasible,
    LockTooWeak,
    EpidemicDies,
}

/// Where `beta_lock S < threshold < beta_free S` stands at susceptible fraction `s`.
pub fn condition_status<T: Real>(model: &EpidemicModel<T>, s: T) -> ConditionStatus {
    let th = condition_threshold(model);
    let (bl, bf) = model.betas();
    if bl * s >= th {
        ConditionStatus::LockTooWeak
    } else if bf * s <= th {
        ConditionStatus::EpidemicDies
    } else {
        ConditionStatus::Feasible
    }
}

/// Setpoint `I0` and the desired sliding polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlTarget<T> {
    pub i0: T,
    pub delta_poly: Poly<T>,
}

impl<T: Real> ControlTarget<T> {
    /// `Delta(s) = s + lambda`, for SEIR and SAIR.
    pub fn first_order(i0: T, lambda: T) -> Self {
        Self { i0, delta_poly: Poly::monic(&[lambda]) }
    }

    /// `Delta(s) = s^2 + d1 s + d0`, for SEAIR.
    pub fn second_order(i0: T, d1: T, d0: T) -> Self {
        Self { i0, delta_poly: Poly::monic(&[d0, d1]) }
    }

    pub fn validate(&self, model: &EpidemicModel<T>) -> Result<()> {
        if !(self.i0 > T::zero() && self.i0 < T::one()) {
            return Err(EpidemicError::InvalidTarget("i0 must lie in (0, 1)".into()));
        }
        let want = model.reduced_dim() - 1;
        if self.delta_poly.degree() != want || !self.delta_poly.is_monic() {
            return Err(EpidemicError::InvalidTarget(format!(
                "{} needs a monic polynomial of degree {want}",
                model.name()
            )));
        }
        if !hurwitz_test(&self.delta_poly).map_err(SynthesisError::from)? {
            return Err(EpidemicError::InvalidTarget("polynomial is not Hurwitz".into()));
        }
        Ok(())
    }

    /// `lambda` of a first-order target.
    pub fn lambda(&self) -> T {
        self.delta_poly.coeff(0)
    }
}

/// Lockdown indicator: lockdown is called for when this is positive.
///
/// SEIR `eps E - delta I + lambda (I - I0)`, SAIR `eps1 A - delta I + lambda (I - I0)`,
/// SEAIR `I'' + d1 I' + d0 (I - I0)` with `I'` and `I''` written out in
/// the states. The contact rate never enters.
pub fn lockdown_indicator<T: Real>(
    model: &EpidemicModel<T>,
    x: &[T],
    target: &ControlTarget<T>,
) -> T {
    let i0 = target.i0;
    match *model {
        EpidemicModel::Seir(p) => {
            let lam = target.lambda();
            p.epsilon * x[1] - p.delta * x[2] + lam * (x[2] - i0)
        }
        EpidemicModel::Sair(p) => {
            let lam = target.lambda();
            p.eps1 * x[1] - p.delta * x[2] + lam * (x[2] - i0)
        }
        EpidemicModel::Seair(p) => {
            let (e, a, i) = (x[1], x[2], x[3]);
            let d0 = target.delta_poly.coeff(0);
            let d1 = target.delta_poly.coeff(1);
            let i_dot = p.eps1 * a - p.delta * i;
            let i_ddot = p.eps1 * (p.epsilon * e - (p.eps1 + p.eps2) * a) - p.delta * i_dot;
            i_ddot + d1 * i_dot + d0 * (i - i0)
        }
    }
}

/// `true` means lockdown; a zero indicator keeps `previous` (freedom when unknown).
pub fn lockdown_law<T: Real>(
    model: &EpidemicModel<T>,
    x: &[T],
    target: &ControlTarget<T>,
    previous: Option<bool>,
) -> bool {
    let v = lockdown_indicator(model, x, target);
    if v > T::zero() {
        true
    } else if v < T::zero() {
        false
    } else {
        previous.unwrap_or(false)
    }
}

/// The sliding row `K` in closed form.
pub fn closed_form_k<T: Real>(model: &EpidemicModel<T>, target: &ControlTarget<T>) -> Vec<T> {
    match *model {
        EpidemicModel::Seir(p) => vec![-T::one(), (p.delta - target.lambda()) / p.epsilon],
        EpidemicModel::Sair(p) => vec![-T::one(), (p.delta - target.lambda()) / p.eps1],
        EpidemicModel::Seair(p) => {
            let d0 = target.delta_poly.coeff(0);
            let d1 = target.delta_poly.coeff(1);
            vec![
                -T::one(),
                (p.eps1 + p.eps2 + p.delta - d1) / p.epsilon,
                -(p.delta * p.delta - p.delta * d1 + d0) / (p.epsilon * p.eps1),
            ]
        }
    }
}

/// The equilibrium of the reduced plant in closed form, with `I = I0`.
pub fn closed_form_x_eq<T: Real>(model: &EpidemicModel<T>, i0: T) -> Vec<T> {
    match *model {
        EpidemicModel::Seir(p) => vec![p.delta / p.epsilon * i0, i0],
        EpidemicModel::Sair(p) => vec![p.delta / p.eps1 * i0, i0],
        EpidemicModel::Seair(p) => vec![
            p.delta * (p.eps1 + p.eps2) / (p.epsilon * p.eps1) * i0,
            p.delta / p.eps1 * i0,
            i0,
        ],
    }
}

/// Builds the controller for the reduced plant through the generic
/// synthesis pipeline. `x_eq` is scaled so that its `I` entry equals `I0`.
pub fn epidemic_controller<T: Real>(
    model: &EpidemicModel<T>,
    target: &ControlTarget<T>,
) -> Result<Controller<T>> {
    model.validate()?;
    target.validate(model)?;
    let plant = reduced_plant(model);
    let gamma0 = affine_det_root(&plant, T::zero(), T::one())
        .ok_or_else(|| EpidemicError::InvalidParams("determinant independent of gain".into()))?;
    let i_pos = model.reduced_dim() - 1;
    let x_eq = compute_x_eq(&plant, gamma0, target.i0, XeqNormalization::Component(i_pos))?;
    let k = compute_k(&plant, &target.delta_poly)?;
    let sign_h_xeq = if dot(&plant.h, &x_eq) < T::zero() { -1 } else { 1 };
    Ok(Controller { k, x_eq, gamma0, sign_h_xeq, delta_poly: target.delta_poly.clone() })
}

/// The model as a [`SwitchedDynamics`] with the contact rate as parameter.
pub struct EpidemicDynamics<T> {
    pub model: EpidemicModel<T>,
}

impl<T: Real> SwitchedDynamics<T> for EpidemicDynamics<T> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn derivative(&self, x: &[T], beta: T, out: &mut [T]) {
        write_derivatives(&self.model, x, beta, out);
    }

    fn check_state(&self, x: &[T]) -> std::result::Result<(), String> {
        self.model.check_simplex(x)
    }
}

/// Two-level contact-rate law driven by `sigma = K (x_red - x_eq)`;
/// `sigma < 0` is lockdown.
pub struct EpidemicLaw<T> {
    pub model: EpidemicModel<T>,
    pub controller: Controller<T>,
}

impl<T: Real> FeedbackLaw<T> for EpidemicLaw<T> {
    fn sigma(&self, x: &[T]) -> T {
        crate::synthesis::switching_sigma(&self.controller, self.model.reduced_state(x))
    }

    fn choose(
        &mut self,
        sigma: T,
        previous: Option<IntervalChoice>,
        band: T,
    ) -> std::result::Result<(IntervalChoice, T), SynthesisError> {
        let choice = hysteresis_choice(sigma, previous, band);
        let (bl, bf) = self.model.betas();
        Ok((choice, if choice == IntervalChoice::I1 { bl } else { bf }))
    }

    fn recorded_gain(&self, x: &[T], beta: T) -> T {
        beta * x[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpidemicRun<T> {
    pub controller: Controller<T>,
    pub trajectory: Trajectory<T>,
    /// `condition_status(S)` at every recorded sample.
    pub status: Vec<ConditionStatus>,
    /// First time the status becomes `EPIDEMIC_DIES` after sliding has set in.
    pub endgame_time: Option<T>,
}

impl<T: Real> EpidemicRun<T> {
    /// Recorded sample indices where the status changes, with the new status.
    pub fn status_changes(&self) -> Vec<(T, ConditionStatus)> {
        let times = self.trajectory.times();
        let mut out = Vec::new();
        let mut last = None;
        for (k, &s) in self.status.iter().enumerate() {
            if last != Some(s) {
                out.push((times[k], s));
                last = Some(s);
            }
        }
        out
    }
}

pub fn simulate_epidemic<T: Real>(
    model: &EpidemicModel<T>,
    target: &ControlTarget<T>,
    x0: &[T],
    cfg: &SimConfig<T>,
) -> Result<EpidemicRun<T>> {
    let controller = epidemic_controller(model, target)?;
    model.check_simplex(x0).map_err(EpidemicError::InvalidState)?;
    let dynamics = EpidemicDynamics { model: *model };
    let mut law = EpidemicLaw { model: *model, controller: controller.clone() };
    let trajectory = simulate_nonlinear(&dynamics, &mut law, x0, cfg)?;
    let status: Vec<ConditionStatus> =
        trajectory.states().map(|x| condition_status(model, x[0])).collect();
    let endgame_time = trajectory.first_onset().and_then(|onset| {
        trajectory
            .times()
            .iter()
            .zip(&status)
            .find(|(&t, &s)| t >= onset.time && s == ConditionStatus::EpidemicDies)
            .map(|(&t, _)| t)
    });
    Ok(EpidemicRun { controller, trajectory, status, endgame_time })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seir(bl: f64, bf: f64) -> EpidemicModel<f64> {
        EpidemicModel::Seir(SeirParams { beta_lock: bl, beta_free: bf, delta: 0.2, epsilon: 0.2 })
    }

    fn sair() -> EpidemicModel<f64> {
        EpidemicModel::Sair(SairParams {
            beta_lock: 0.1,
            beta_free: 0.8,
            delta: 0.2,
            eps1: 0.1,
            eps2: 0.1,
        })
    }

    fn seair() -> EpidemicModel<f64> {
        EpidemicModel::Seair(SeairParams {
            beta_lock: 0.1,
            beta_free: 0.8,
            delta: 0.2,
            epsilon: 0.3,
            eps1: 0.1,
            eps2: 0.1,
        })
    }

    #[test]
    fn seir_derivative_example() {
        let d = derivatives(&seir(0.2, 0.8), &[0.9, 0.0, 0.1, 0.0], 0.8);
        let want = [-0.072, 0.072, -0.02, 0.02];
        for (a, b) in d.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(derivatives(&seir(0.2, 0.8), &[1.0, 0.0, 0.0, 0.0], 0.8), vec![0.0; 4]);
    }

    #[test]
    fn reduced_plant_outputs() {
        assert_eq!(reduced_plant(&seir(0.2, 0.8)).h, vec![0.0, 1.0]);
        assert_eq!(reduced_plant(&sair()).h, vec![1.0, 1.0]);
        assert_eq!(reduced_plant(&seair()).h, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn thresholds() {
        assert_eq!(condition_threshold(&seir(0.2, 0.8)), 0.2);
        assert!((condition_threshold(&sair()) - 0.04 / 0.3).abs() < 1e-15);
        let m = seair();
        let EpidemicModel::Seair(p) = m else { unreachable!() };
        let twin = EpidemicModel::Sair(SairParams {
            beta_lock: p.beta_lock,
            beta_free: p.beta_free,
            delta: p.delta,
            eps1: p.eps1,
            eps2: p.eps2,
        });
        assert_eq!(condition_threshold(&m), condition_threshold(&twin));
    }

    #[test]
    fn thresholds_match_gain_root() {
        for m in [seir(0.2, 0.8), sair(), seair()] {
            let root = affine_det_root(&reduced_plant(&m), 0.0, 1.0).unwrap();
            assert!((root - condition_threshold(&m)).abs() < 1e-14);
        }
    }

    #[test]
    fn statuses() {
        assert_eq!(condition_status(&seir(0.2, 0.8), 0.99), ConditionStatus::Feasible);
        assert_eq!(condition_status(&seir(0.21, 0.8), 0.99), ConditionStatus::LockTooWeak);
        assert_eq!(condition_status(&seir(0.2, 0.8), 0.1), ConditionStatus::EpidemicDies);
    }

    #[test]
    fn lockdown_example() {
        let t = ControlTarget::first_order(1e-3, 1.0);
        let x = [0.989, 0.01, 0.001, 0.0];
        let v = lockdown_indicator(&seir(0.2, 0.8), &x, &t);
        assert!((v - 0.0018).abs() < 1e-15);
        assert!(lockdown_law(&seir(0.2, 0.8), &x, &t, None));
        let eq = [0.998, 1e-3, 1e-3, 0.0];
        assert_eq!(lockdown_indicator(&seir(0.2, 0.8), &eq, &t), 0.0);
        assert!(lockdown_law(&seir(0.2, 0.8), &eq, &t, Some(true)));
        assert!(!lockdown_law(&seir(0.2, 0.8), &eq, &t, Some(false)));
    }

    #[test]
    fn sigma_is_scaled_indicator() {
        let cases = [
            (seir(0.2, 0.8), ControlTarget::first_order(1e-3, 1.0), vec![0.9, 0.03, 0.02, 0.05], 0.2),
            (sair(), ControlTarget::first_order(1e-3, 0.7), vec![0.9, 0.03, 0.02, 0.05], 0.1),
            (seair(), ControlTarget::second_order(1e-3, 2.0, 1.0), vec![0.9, 0.02, 0.03, 0.01, 0.04], 0.03),
        ];
        for (m, t, x, scale) in cases {
            let law = EpidemicLaw { model: m, controller: epidemic_controller(&m, &t).unwrap() };
            let s = law.sigma(&x);
            let v = lockdown_indicator(&m, &x, &t);
            assert!((s + v / scale).abs() < 1e-12 * v.abs().max(1e-3), "{s} {v}");
        }
    }

    #[test]
    fn synthesized_matches_closed_form() {
        let cases = [
            (seir(0.2, 0.8), ControlTarget::first_order(1e-3, 1.0)),
            (sair(), ControlTarget::first_order(1e-3, 0.7)),
            (seair(), ControlTarget::second_order(1e-3, 2.0, 1.0)),
        ];
        for (m, t) in cases {
            let c = epidemic_controller(&m, &t).unwrap();
            for (a, b) in c.k.iter().zip(closed_form_k(&m, &t)) {
                assert!((a - b).abs() < 1e-10, "{m:?}");
            }
            for (a, b) in c.x_eq.iter().zip(closed_form_x_eq(&m, t.i0)) {
                assert!((a - b).abs() < 1e-15, "{m:?}");
            }
        }
    }

    #[test]
    fn target_validation() {
        let m = seir(0.2, 0.8);
        assert!(ControlTarget::first_order(1e-3, 1.0).validate(&m).is_ok());
        assert!(ControlTarget::first_order(0.0, 1.0).validate(&m).is_err());
        assert!(ControlTarget::first_order(1e-3, -1.0).validate(&m).is_err());
        assert!(ControlTarget::second_order(1e-3, 1.0, 1.0).validate(&m).is_err());
    }

    #[test]
    fn model_json_is_tagged() {
        let m = seir(0.2, 0.8);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"kind\":\"seir\""));
        assert_eq!(serde_json::from_str::<EpidemicModel<f64>>(&s).unwrap(), m);
        assert!(serde_json::from_str::<EpidemicModel<f64>>(
            r#"{"kind":"seir","beta_lock":0.2,"beta_free":0.8,"delta":0.2,"epsilon":0.2,"x":1}"#
        )
        .is_err());
    }

    #[test]
    fn disease_free_start_stays_flat() {
        let m = seir(0.2, 0.8);
        let run = simulate_epidemic(
            &m,
            &ControlTarget::first_order(1e-3, 1.0),
            &m.disease_free(),
            &SimConfig::new(1e-2, 10.0),
        )
        .unwrap();
        assert!(run.trajectory.states().all(|x| x == [1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn seir_run_converges_to_target() {
        let m = seir(0.2, 0.8);
        let run = simulate_epidemic(
            &m,
            &ControlTarget::first_order(1e-3, 1.0),
            &[0.99, 0.005, 0.005, 0.0],
            &SimConfig::new(1e-3, 250.0).with_stride(10),
        )
        .unwrap();
        assert!(run.trajectory.first_onset().is_some());
        let i = run.trajectory.final_state()[2];
        assert!((i - 1e-3).abs() < 2e-5, "{i}");
        assert!(run.status.iter().all(|&s| s == ConditionStatus::Feasible));
    }

    #[test]
    fn rejects_off_simplex_start() {
        let m = seir(0.2, 0.8);
        let r = simulate_epidemic(
            &m,
            &ControlTarget::first_order(1e-3, 1.0),
            &[0.5, 0.0, 0.0, 0.0],
            &SimConfig::new(1e-2, 1.0),
        );
        assert!(matches!(r, Err(EpidemicError::InvalidState(_))));
    }
}
