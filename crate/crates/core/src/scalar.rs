//! Scalar abstraction for the dimensionless core.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Real scalar the dynamics are generic over (`f32` or `f64`).
pub trait Real:
    RealField + Copy + Default + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Machine epsilon of the scalar type.
    fn eps() -> Self {
        Self::default_epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type Cx<T> = Complex<T>;

pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

pub(crate) fn re<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

pub(crate) fn im<T: Real>(x: T) -> Cx<T> {
    Complex::new(T::zero(), x)
}
