//! Scalar abstraction for the closed-form layer.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar accepted by the generic numerics.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every implementor represents all finite `f64`
    /// values approximately, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion back to `f64`, used for diagnostics and errors.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Integer literal.
    #[inline]
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
