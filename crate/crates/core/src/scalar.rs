//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar the simulator is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every literal used in the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn from_index(n: i64) -> Self {
        Self::from_i64(n).expect("index representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Total order treating NaN as larger than every number.
    fn total_cmp_real(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other)
            .unwrap_or_else(|| self.is_nan().cmp(&other.is_nan()))
    }

    /// Loose absolute tolerance for post-condition checks: `1e-8` in `f64`,
    /// widened to `1e4·eps` for lower-precision types.
    fn check_tolerance() -> Self {
        Self::lit(1e-8).max(Self::epsilon() * Self::lit(1e4))
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Complex<T> = num_complex::Complex<T>;

/// `|re| + |im|`, the cheap modulus used for pivoting and deflation tests.
#[inline]
pub(crate) fn cabs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// Pairwise (tree) summation. Result depends only on the input order, never on
/// how the values were produced.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        let mut acc = T::zero();
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `sin(x)/x` with the removable singularity filled in.
#[inline]
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}

/// Rounds half away from zero and returns the integer.
#[inline]
pub(crate) fn round_to_i64<T: Real>(x: T) -> i64 {
    x.round().to_i64().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_for_short_and_long_inputs() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-12);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    #[test]
    fn sinc_is_continuous_at_the_series_switch() {
        for x in [0.99e-4_f64, 1e-4, 1.01e-4] {
            assert!((sinc(x) - x.sin() / x).abs() < 1e-15);
        }
        assert_eq!(sinc(0.0_f64), 1.0);
        assert!((sinc(std::f64::consts::PI / 2.0) - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn check_tolerance_widens_for_single_precision() {
        assert_eq!(f64::check_tolerance(), 1e-8);
        assert!(f32::check_tolerance() > 1e-3);
    }
}
