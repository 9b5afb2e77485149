use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the operator pipeline can run on: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only if the value is not representable.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossless for f64, rounding for f32.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance floor for structural checks, scaled to the type's precision.
    fn tol(f64_tol: f64, eps_mult: f64) -> Self {
        Self::lit(f64_tol).max(Self::epsilon() * Self::lit(eps_mult))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
