//! Scalar traits shared by every module.
//!
//! Two tiers: [`Field`] is enough for the exact kernels (determinant,
//! characteristic polynomial, companion forms, Routh array) and is satisfied
//! by rationals as well as floats. [`Real`] adds `num_traits::Float` for
//! everything that needs square roots, tolerances or time integration.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{Float, FromPrimitive, Num};

/// Ordered field scalar: `f32`, `f64`, `Ratio<i64>`, ...
pub trait Field:
    Copy + Debug + PartialOrd + Num + Neg<Output = Self> + FromPrimitive + Send + Sync + 'static
{
    /// Absolute value through the ordering, so rationals qualify.
    fn magnitude(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl<T> Field for T where
    T: Copy + Debug + PartialOrd + Num + Neg<Output = T> + FromPrimitive + Send + Sync + 'static
{
}

/// Floating-point scalar.
pub trait Real: Field + Float {}

impl<T> Real for T where T: Field + Float {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Field>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a count into the working scalar.
#[inline]
pub fn count<T: Field>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Lossy conversion for reporting and file output.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Default relative rank tolerance: `1e-9`, widened for low-precision types.
pub fn default_rank_tol<T: Real>() -> T {
    let floor: T = lit(1e-9);
    let scaled = T::epsilon() * lit(1e3);
    if scaled > floor {
        scaled
    } else {
        floor
    }
}
