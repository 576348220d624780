//! Floating-point abstraction shared by the analytic kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar usable by the analytic engine: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub(crate) fn count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}
