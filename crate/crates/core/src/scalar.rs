//! Scalar abstraction for the numeric core.
//!
//! All channel, rate, and solver arithmetic is generic over [`Real`] so the
//! same code paths run in `f32` or `f64`. The experiment harness pins `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar usable throughout the numeric core.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + Sum<T> + Debug + Display + Send + Sync + 'static
{
}

/// Shorthand for lifting an `f64` literal into the working scalar.
#[inline]
pub fn lit<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("literal representable in scalar type")
}

/// log2 in the working scalar.
#[inline]
pub fn log2<F: Real>(x: F) -> F {
    x.log2()
}

/// 2^x in the working scalar.
#[inline]
pub fn exp2<F: Real>(x: F) -> F {
    x.exp2()
}
