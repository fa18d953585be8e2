//! Scalar abstractions.
//!
//! Everything that is polynomial in the rates (scale sets, Gaussian raw
//! moments, the moment tables) is generic over [`Scalar`], so it runs
//! unchanged on `f64`, `f32` or exact rationals. Anything that needs a
//! transcendental function (densities, tail probabilities, infinite
//! products) requires [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// A field-like number type: `f32`, `f64`, `BigRational`, ...
pub trait Scalar:
    Num + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Num + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Send + Sync + 'static
{
}

/// Floating point: `f32` or `f64`.
pub trait Real: Scalar + Float + FloatConst + Copy {}

impl<T> Real for T where T: Scalar + Float + FloatConst + Copy {}

/// Converts an `f64` literal. Exact for rationals and `f64`, rounded for `f32`.
#[inline]
pub(crate) fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("finite literal representable in scalar type")
}

#[inline]
pub(crate) fn int<T: Scalar>(n: u64) -> T {
    T::from_u64(n).expect("integer representable in scalar type")
}

/// Lossy view as `f64`, used for error messages and reports.
#[inline]
pub(crate) fn approx<T: Scalar>(v: &T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn is_negative<T: Scalar>(v: &T) -> bool {
    *v < T::zero()
}
