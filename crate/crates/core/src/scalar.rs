//! Scalar abstraction for the numeric core.
//!
//! Everything numeric in this crate is generic over [`Scalar`], so the same
//! code runs in `f32` or `f64`. The crate-root aliases pin `f64`, which is
//! what the distribution math, training loops and file formats use by
//! default.

use std::fmt;
use std::iter::Sum;

use num_traits::Float;

/// Floating-point element type for tensors, gates and losses.
pub trait Scalar:
    Float
    + num_traits::NumAssignOps
    + Sum
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Conversion from `f64` (identity for `f64`, narrowing for `f32`).
    fn from_f64(v: f64) -> Self;

    /// Widening conversion to `f64`.
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }
}

/// Numerically stable logistic function `1 / (1 + e^{-x})`.
///
/// Saturates cleanly to 0 or 1 for large `|x|` instead of overflowing.
pub fn logistic<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Log-odds `ln(u / (1 - u))` for `u` in (0, 1).
pub fn logit<T: Scalar>(u: T) -> T {
    u.ln() - (-u).ln_1p()
}
