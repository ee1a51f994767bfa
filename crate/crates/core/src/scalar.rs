//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Accuracy targets quoted throughout the crate (1e-12 Bessel error, 1e-10
/// norm conservation) hold for `f64`; `f32` runs the same algorithms at its
/// own precision.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every value used in this crate is
    /// representable (possibly rounded) in both supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `2π`.
    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_phase<T: Real>(phase: T) -> T {
    let tau = T::two_pi();
    let mut r = phase % tau;
    if r < T::zero() {
        r += tau;
    }
    if r >= tau {
        r = T::zero();
    }
    r
}
