//! Floating point abstraction used by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar for probabilities, NPT entries and indicator values: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Tolerance used when checking that a probability vector sums to one.
    fn normalization_tolerance() -> Self;

    /// Lossy conversion from `f64`; literals and parsed model values enter through here.
    #[inline]
    fn of(value: f64) -> Self {
        <Self as FromPrimitive>::from_f64(value).expect("f64 converts to every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("Scalar converts to f64")
    }

    #[inline]
    fn of_usize(value: usize) -> Self {
        Self::of(value as f64)
    }
}

impl Scalar for f32 {
    fn normalization_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn normalization_tolerance() -> Self {
        1e-9
    }
}

/// Sum of a slice.
pub(crate) fn sum<S: Scalar>(values: &[S]) -> S {
    values.iter().fold(S::zero(), |acc, &v| acc + v)
}

/// Divides `values` by their sum in place so that they add up to one.
///
/// Returns the original sum. A zero or non-finite sum leaves `values` untouched.
pub(crate) fn normalize<S: Scalar>(values: &mut [S]) -> S {
    let total = sum(values);
    if total > S::zero() && total.is_finite() {
        for v in values.iter_mut() {
            *v = *v / total;
        }
    }
    total
}
