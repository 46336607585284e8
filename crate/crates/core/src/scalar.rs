use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numeric code is generic over.
///
/// Implemented for `f32` and `f64`. Conversions go through `f64`, which is
/// lossless for every implementor.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless widening to `f64`.
    fn to_f64_lossless(self) -> f64;

    /// Conversion from `f64`, rounding to the nearest representable value.
    fn from_f64_lossy(v: f64) -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self as f64
    }

    #[inline]
    fn from_f64_lossy(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self
    }

    #[inline]
    fn from_f64_lossy(v: f64) -> Self {
        v
    }
}
