//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::{ClosedAddAssign, ClosedMulAssign};
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the geometry, maps and measures are written against.
///
/// Statistics (counts, confidence intervals, fitted rates) are always
/// reported in `f64` regardless of the scalar used for orbits.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + ClosedAddAssign
    + ClosedMulAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Reduce `x` into `[0, 1)`.
#[inline]
pub fn frac<S: Scalar>(x: S) -> S {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1
    if r >= S::one() {
        S::zero()
    } else {
        r
    }
}
