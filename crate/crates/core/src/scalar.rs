//! Scalar abstraction shared by every diagnostic.
//!
//! All rates in this crate are ratios of weighted counts, so the math only
//! needs field operations and an ordering. That lets the same code run over
//! `f32`, `f64`, and exact rationals ([`Exact`]), which the test suite uses to
//! check the floating-point paths against closed forms with no rounding at all.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

/// Exact rational scalar. Adequate for hand-built ensembles and small random
/// corpora whose weights have small denominators.
pub type Exact = Ratio<i64>;

/// Numeric type a prediction matrix and its diagnostics can be computed in.
pub trait Scalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Absolute tolerance for equality tests (vote ties, normalization,
    /// interval boundaries). Zero for exact types.
    fn tolerance() -> Self;

    /// Lossy conversion from `f64`; `None` for non-finite input.
    fn from_f64(value: f64) -> Option<Self>;

    fn to_f64(self) -> f64;

    fn from_usize(value: usize) -> Self;

    /// `num / den`.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_usize(num) / Self::from_usize(den)
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn abs_val(self) -> Self {
        if self < Self::zero() {
            Self::zero() - self
        } else {
            self
        }
    }

    fn max_val(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_val(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn clamp_unit(self) -> Self {
        self.max_val(Self::zero()).min_val(Self::one())
    }

    /// `|self - other| <= tolerance()`.
    fn approx_eq(self, other: Self) -> bool {
        (self - other).abs_val() <= Self::tolerance()
    }

    fn is_finite_val(self) -> bool;
}

macro_rules! impl_float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn tolerance() -> Self {
                $tol
            }

            fn from_f64(value: f64) -> Option<Self> {
                value.is_finite().then_some(value as $t)
            }

            fn to_f64(self) -> f64 {
                self as f64
            }

            fn from_usize(value: usize) -> Self {
                value as $t
            }

            fn is_finite_val(self) -> bool {
                self.is_finite()
            }
        }
    };
}

impl_float_scalar!(f64, 1e-12);
impl_float_scalar!(f32, 1e-5);

impl Scalar for Exact {
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }

    fn from_f64(value: f64) -> Option<Self> {
        Ratio::approximate_float(value)
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn from_usize(value: usize) -> Self {
        Ratio::from_integer(value as i64)
    }

    fn is_finite_val(self) -> bool {
        true
    }
}

/// Sums a slice by pairwise (tree) reduction.
///
/// The reduction order depends only on the slice length, so results are
/// bit-for-bit reproducible and rounding error grows as `O(log n)`.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().fold(T::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Arithmetic mean by pairwise summation. Zero for an empty slice.
pub fn mean<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    pairwise_sum(values) / T::from_usize(values.len())
}
