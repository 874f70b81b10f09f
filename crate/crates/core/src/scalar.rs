//! Numeric traits the probabilistic parts of the crate are generic over.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, NumCast, ToPrimitive};

/// Floating point scalar used for probabilities, log-scores and weights: f32 or f64.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a count, saturating through f64.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).unwrap_or_else(Self::infinity)
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// A field that confusion-matrix ratios can be computed in.
///
/// Implemented for the float types and for `Ratio<i64>`, so that closed-form
/// metric values (1/2, 2/3, ...) can be checked exactly.
pub trait Fraction: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    fn from_count(n: u64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Fraction for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }
    fn to_f64(&self) -> f64 {
        <f64 as From<f32>>::from(*self)
    }
}

impl Fraction for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Fraction for Ratio<i64> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(i64::try_from(n).expect("count exceeds i64"))
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}
