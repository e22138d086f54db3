//! Scalar abstraction for distances, costs and bound arithmetic.
//!
//! All numeric tables in this crate are generic over [`Scalar`]. The two
//! instantiations that matter in practice are `f64` (production solves;
//! integer-valued grid models stay exact because the DP only selects among
//! table entries) and [`Rational`] (arbitrary-precision rationals; makes
//! Lipschitz ratios and the error-bound recursion exact, so boundary
//! comparisons in bound certificates cannot be flipped by rounding).

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Sub};

/// Arbitrary-precision rational scalar.
pub type Rational = Ratio<BigInt>;

/// Numeric type usable for distances, costs and derived bounds.
///
/// Values handled through this trait are finite and non-negative by model
/// validation; differences of values may be negative intermediates but every
/// public quantity (distance, cost, gap, bound) is non-negative.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Zero
    + One
    + Send
    + Sync
    + 'static
{
    /// Slack admitted when checking metric axioms on user-supplied tables.
    /// Zero for exact scalars.
    fn metric_tolerance() -> Self;

    /// Conversion from an `f64` table value. Exact for integers (and for all
    /// dyadic rationals when the target is [`Rational`]).
    fn from_f64_value(v: f64) -> Option<Self>;

    /// Lossy rendering back to `f64` for reports and dumps.
    fn to_f64_value(&self) -> f64;

    /// Exact embedding of a small count (hop distances, set sizes).
    fn from_count(n: usize) -> Self {
        Self::from_f64_value(n as f64).expect("count representable in scalar")
    }
}

impl Scalar for f64 {
    fn metric_tolerance() -> Self {
        1e-9
    }

    fn from_f64_value(v: f64) -> Option<Self> {
        Some(v)
    }

    fn to_f64_value(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn metric_tolerance() -> Self {
        1e-5
    }

    fn from_f64_value(v: f64) -> Option<Self> {
        Some(v as f32)
    }

    fn to_f64_value(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for Rational {
    fn metric_tolerance() -> Self {
        Rational::zero()
    }

    fn from_f64_value(v: f64) -> Option<Self> {
        Rational::from_float(v)
    }

    fn to_f64_value(&self) -> f64 {
        self.to_f64().unwrap_or_else(|| {
            // Fall back to component division for ratios outside f64 range.
            self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
        })
    }
}

/// Total order on scalars; table values are validated finite so `partial_cmp`
/// cannot fail on model data.
pub fn cmp<S: Scalar>(a: &S, b: &S) -> Ordering {
    a.partial_cmp(b).expect("scalar values must be comparable")
}

pub fn smax<S: Scalar>(a: S, b: S) -> S {
    if cmp(&a, &b) == Ordering::Less {
        b
    } else {
        a
    }
}

pub fn smin<S: Scalar>(a: S, b: S) -> S {
    if cmp(&a, &b) == Ordering::Greater {
        b
    } else {
        a
    }
}

/// |a - b| without requiring `Neg`.
pub fn abs_diff<S: Scalar>(a: S, b: S) -> S {
    if cmp(&a, &b) == Ordering::Less {
        b - a
    } else {
        a - b
    }
}

/// Maximum of a non-empty iterator.
pub fn max_of<S: Scalar>(iter: impl IntoIterator<Item = S>) -> Option<S> {
    iter.into_iter().reduce(smax)
}

/// Minimum of a non-empty iterator.
pub fn min_of<S: Scalar>(iter: impl IntoIterator<Item = S>) -> Option<S> {
    iter.into_iter().reduce(smin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_from_f64_is_exact_for_integers() {
        let r = Rational::from_f64_value(20.0).unwrap();
        assert_eq!(r, Rational::from_count(20));
        assert_eq!(r.to_f64_value(), 20.0);
    }

    #[test]
    fn abs_diff_is_symmetric() {
        assert_eq!(abs_diff(3.0, 5.0), 2.0);
        assert_eq!(abs_diff(5.0, 3.0), 2.0);
        let a = Rational::from_count(7);
        let b = Rational::from_count(2);
        assert_eq!(abs_diff(a.clone(), b.clone()), abs_diff(b, a));
    }

    #[test]
    fn max_min_of_iterators() {
        assert_eq!(max_of([1.0, 4.0, 2.0]), Some(4.0));
        assert_eq!(min_of([1.0, 4.0, 2.0]), Some(1.0));
        assert_eq!(max_of(Vec::<f64>::new()), None);
    }
}
