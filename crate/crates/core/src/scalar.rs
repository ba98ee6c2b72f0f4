//! Scalar abstraction for the numeric core.
//!
//! All math in this crate is generic over [`Scalar`] so the same code runs in
//! f32 or f64. Training and the test suite use the f64 aliases exported from
//! the crate root, where gradient checks against central differences are
//! decisive.

use num_traits::{Float, FromPrimitive};

/// Floating point scalar: f32 or f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + core::ops::AddAssign
    + core::ops::SubAssign
    + core::ops::MulAssign
    + core::fmt::Display
    + core::fmt::Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from f64 literals (hyperparameters, RNG draws).
    fn from_f64(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 conversion")
    }

    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

/// Numerically stable logistic sigmoid.
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}
