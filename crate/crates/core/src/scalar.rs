//! Floating-point abstraction shared by the analytic modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used throughout the evaluator. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for finite inputs.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts a count or size.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("representable size")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `w · x`, taken as zero when the weight is zero even if `x` is not finite.
pub(crate) fn weighted<T: Real>(w: T, x: T) -> T {
    if w == T::zero() {
        T::zero()
    } else {
        w * x
    }
}
