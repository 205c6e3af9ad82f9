//! Scalar abstraction for the probability and entropy code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar used by the channel and typicality math: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant into this type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lift a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite real")
    }

    /// Tolerance for "sums to one" checks, scaled to the precision of the type.
    fn stochastic_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }

    /// `-p * log2(p)` with the `0 log 0 = 0` convention.
    fn entropy_term(self) -> Self {
        if self <= Self::zero() {
            Self::zero()
        } else {
            -self * self.log2()
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
