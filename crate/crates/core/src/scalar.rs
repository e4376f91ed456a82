//! The floating-point abstraction every numerical routine is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used by the numerical core.
///
/// Implemented for `f32` and `f64`. Exponents stay `f64` throughout and are
/// converted with [`Scalar::of`] at the point of use.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    /// Widening conversion used for reporting.
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Working tolerance: `1e-11` for `f64`, scaled up to a few ulps of one
    /// for narrower types.
    fn tol() -> Self {
        let t = Self::of(1e-11);
        let floor = Self::epsilon() * Self::of(64.0);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
