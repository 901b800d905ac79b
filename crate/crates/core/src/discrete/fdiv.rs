//! f-divergences `Σ q f(p/q)` with zero-mass cells resolved by limits.

use crate::error::Result;
use crate::scalar::Scalar;

use super::tables::{ExtReal, Pmf};

/// A convex generator `f` with `f(1) = 0`.
pub trait FGenerator<T: Scalar> {
    fn eval(&self, t: T) -> T;

    /// `lim_{t→0+} f(t)`: the contribution per unit of `q` where `p = 0`.
    fn at_zero(&self) -> T;

    /// `lim_{t→∞} f(t)/t`: the contribution per unit of `p` where `q = 0`.
    fn slope_at_infinity(&self) -> ExtReal<T>;

    /// `q · f(p/q)` for `p, q > 0`.
    fn term(&self, p: T, q: T) -> T {
        q * self.eval(p / q)
    }
}

/// `f(t) = t ln t`, giving the KL divergence.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kl;

impl<T: Scalar> FGenerator<T> for Kl {
    fn eval(&self, t: T) -> T {
        if t == T::zero() {
            T::zero()
        } else {
            t * t.ln()
        }
    }

    fn at_zero(&self) -> T {
        T::zero()
    }

    fn slope_at_infinity(&self) -> ExtReal<T> {
        ExtReal::Infinite
    }

    fn term(&self, p: T, q: T) -> T {
        p * (p / q).ln()
    }
}

/// Jensen-Shannon in the unhalved form `D(p‖m) + D(q‖m)`, `m = (p+q)/2`;
/// `f(t) = t ln t − (t+1) ln((t+1)/2)`. Bounded by `2 ln 2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct JensenShannon;

impl<T: Scalar> FGenerator<T> for JensenShannon {
    fn eval(&self, t: T) -> T {
        let one = T::one();
        let two = T::c(2.0);
        let lhs = if t == T::zero() {
            T::zero()
        } else {
            t * t.ln()
        };
        lhs - (t + one) * ((t + one) / two).ln()
    }

    fn at_zero(&self) -> T {
        T::c(2f64.ln())
    }

    fn slope_at_infinity(&self) -> ExtReal<T> {
        ExtReal::Finite(T::c(2f64.ln()))
    }

    fn term(&self, p: T, q: T) -> T {
        let two = T::c(2.0);
        let s = p + q;
        p * (two * p / s).ln() + q * (two * q / s).ln()
    }
}

/// `f(t) = ½|t − 1|`, giving the total variation distance.
#[derive(Clone, Copy, Debug, Default)]
pub struct TotalVariation;

impl<T: Scalar> FGenerator<T> for TotalVariation {
    fn eval(&self, t: T) -> T {
        T::c(0.5) * (t - T::one()).abs()
    }

    fn at_zero(&self) -> T {
        T::c(0.5)
    }

    fn slope_at_infinity(&self) -> ExtReal<T> {
        ExtReal::Finite(T::c(0.5))
    }

    fn term(&self, p: T, q: T) -> T {
        T::c(0.5) * (p - q).abs()
    }
}

/// A user-supplied convex function with explicit boundary limits.
pub struct ConvexFn<T, F> {
    pub f: F,
    pub at_zero: T,
    pub slope_at_infinity: ExtReal<T>,
}

impl<T: Scalar, F: Fn(T) -> T> FGenerator<T> for ConvexFn<T, F> {
    fn eval(&self, t: T) -> T {
        (self.f)(t)
    }

    fn at_zero(&self) -> T {
        self.at_zero
    }

    fn slope_at_infinity(&self) -> ExtReal<T> {
        self.slope_at_infinity
    }
}

pub fn f_divergence<T: Scalar, G: FGenerator<T> + ?Sized>(
    f: &G,
    p: &Pmf<T>,
    q: &Pmf<T>,
) -> Result<ExtReal<T>> {
    p.check_same_alphabet(q)?;
    let mut acc = ExtReal::zero();
    for (&pi, &qi) in p.probs().iter().zip(q.probs()) {
        let cell = match (pi > T::zero(), qi > T::zero()) {
            (false, false) => continue,
            (false, true) => ExtReal::Finite(qi * f.at_zero()),
            (true, false) => f.slope_at_infinity().weighted(pi),
            (true, true) => ExtReal::Finite(f.term(pi, qi)),
        };
        acc = acc + cell;
    }
    Ok(acc)
}

pub fn js_divergence<T: Scalar>(p: &Pmf<T>, q: &Pmf<T>) -> Result<T> {
    Ok(f_divergence(&JensenShannon, p, q)?.value())
}

pub fn total_variation<T: Scalar>(p: &Pmf<T>, q: &Pmf<T>) -> Result<T> {
    Ok(f_divergence(&TotalVariation, p, q)?.value())
}
