//! Real scalar abstraction shared by the geometric and statistical code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + rstar::RTreeNum + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to every Scalar")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance for treating two computed distances or angles as equal.
    fn tie_tolerance() -> Self {
        Self::epsilon().sqrt()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
