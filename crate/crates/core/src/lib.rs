//! Sliding-mode control of linear plants whose feedback gain is confined to
//! two disjoint intervals, with an application to lockdown scheduling in
//! compartmental epidemic models.
//!
//! Every numeric routine is generic over the scalar (see [`num`]); the
//! aliases below fix the common choices.

pub mod epidemics;
pub mod global_analysis;
pub mod linalg;
pub mod num;
pub mod sim;
pub mod synthesis;

pub use num::{Field, Real};

use num_rational::Ratio;

pub type Rational = Ratio<i64>;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Poly64 = linalg::Poly<f64>;
pub type Plant64 = synthesis::Plant<f64>;
pub type GainIntervals64 = synthesis::GainIntervals<f64>;
pub type Controller64 = synthesis::Controller<f64>;
pub type Trajectory64 = sim::Trajectory<f64>;
pub type SimConfig64 = sim::SimConfig<f64>;

pub type Matrix32 = linalg::Matrix<f32>;
pub type Poly32 = linalg::Poly<f32>;
pub type Plant32 = synthesis::Plant<f32>;
pub type Controller32 = synthesis::Controller<f32>;

pub type MatrixQ = linalg::Matrix<Rational>;
pub type PolyQ = linalg::Poly<Rational>;
