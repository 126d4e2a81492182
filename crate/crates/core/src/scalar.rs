//! Scalar abstraction for the deterministic parts of the crate.
//!
//! Bound calculus, schedule formulas, payoff evaluation and the triplet
//! containers are written against [`Scalar`] so they can be evaluated in
//! either `f32` or `f64`. Samplers and quadrature run in `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// `max(log x, 0)`, with `log⁺(0) = 0`.
    #[inline]
    fn log_plus(self) -> Self {
        if self > Self::one() {
            self.ln()
        } else {
            Self::zero()
        }
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
