//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating point scalar the solvers are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// assume `f64`; `f32` runs are useful for smoke tests and memory studies.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Unit roundoff of the type.
    const EPS: Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const EPS: Self = f64::EPSILON;

    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
}

impl Real for f32 {
    const EPS: Self = f32::EPSILON;

    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
}

/// Converts a count to the scalar type.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::lit(n as f64)
}

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation with a fixed split point.
///
/// The reduction tree depends only on the slice length, so results are
/// bit-reproducible no matter how the inputs were produced.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= PAIRWISE_BLOCK {
        let mut acc = T::zero();
        for &x in xs {
            acc = acc + x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(i)` for `i` in `0..n`, without materialising a buffer
/// for small inputs.
pub fn pairwise_sum_by<T: Real, F: Fn(usize) -> T>(n: usize, f: F) -> T {
    fn rec<T: Real, F: Fn(usize) -> T>(lo: usize, hi: usize, f: &F) -> T {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut acc = T::zero();
            for i in lo..hi {
                acc = acc + f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, &f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(pairwise_sum_by(1000, |i| xs[i]), 499_500.0);
    }

    #[test]
    fn pairwise_by_agrees_with_slice_version_bitwise() {
        let xs: Vec<f64> = (0..777).map(|i| ((i * 37) as f64).sin() * 1e-3).collect();
        assert_eq!(
            pairwise_sum(&xs).to_bits(),
            pairwise_sum_by(xs.len(), |i| xs[i]).to_bits()
        );
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(pairwise_sum::<f32>(&[]), 0.0);
    }
}
