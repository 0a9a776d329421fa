//! Scalar abstraction shared by the numeric modules.
//!
//! Everything that does linear algebra on walk amplitudes is generic over
//! [`Real`], which is implemented for `f32` and `f64`. Tolerances quoted
//! throughout the crate are for `f64`; [`Real::tol`] widens them to what
//! the narrower type can actually resolve.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type usable as the real field of walk amplitudes.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// `base` as a tolerance, never tighter than a few hundred ulps of one.
    fn tol(base: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(1024.0);
        Self::lit(base).max(floor)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `i` in the complex plane of `T`.
pub(crate) fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Reduces an angle into `[0, 2π)`.
pub fn canonical_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(std::f64::consts::TAU);
    if r >= std::f64::consts::TAU {
        0.0
    } else {
        r
    }
}
