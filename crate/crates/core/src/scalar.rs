//! Scalar abstractions shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Floating-point scalar used by the optimisation and estimation code.
///
/// Implemented for `f32` and `f64`. Constants are converted through
/// [`Real::lit`], which keeps literal-heavy formulas readable.
pub trait Real:
    Float
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field, enough for the divergence sums that need no logarithm.
///
/// Besides `f32`/`f64` this covers exact rationals such as
/// `num_rational::BigRational`, so total variation and Le Cam's distance can be
/// compared without rounding.
pub trait Field: Num + Signed + Clone + PartialOrd {}

impl<F: Num + Signed + Clone + PartialOrd> Field for F {}
