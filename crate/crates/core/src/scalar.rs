//! Scalar abstraction shared by the numeric modules.
//!
//! Everything that only needs field arithmetic (the truncated series
//! machinery) is generic over [`Field`], which rational types satisfy.
//! Code that needs square roots, transcendental functions or eigen
//! decompositions is generic over [`Real`], implemented for `f32` and `f64`.

use std::fmt::Debug;

use nalgebra::RealField;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Exact or floating-point field used by the polynomial series code.
pub trait Field: Num + Clone + Debug {}

impl<T> Field for T where T: Num + Clone + Debug {}

/// Floating-point scalar used by the physics modules.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for [`Real::lit`].
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}
