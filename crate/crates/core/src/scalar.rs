//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point type usable throughout the toolkit: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + Sum
    + LinalgScalar
    + ScalarOperand
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Tolerance used when validating that a probability table sums to one.
    fn prob_tol() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    #[inline]
    fn prob_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    #[inline]
    fn prob_tol() -> Self {
        1e-5
    }
}

/// `ln Σ exp(v)` with the maximum shifted out. Returns `-inf` for an empty
/// or all `-inf` input.
pub fn log_sum_exp<T: Scalar, I>(values: I) -> T
where
    I: IntoIterator<Item = T>,
    I::IntoIter: Clone,
{
    let it = values.into_iter();
    let max = it.clone().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    if max == T::infinity() {
        return max;
    }
    let s: T = it.map(|v| (v - max).exp()).sum();
    max + s.ln()
}
