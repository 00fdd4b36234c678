//! Scalar abstraction shared by every module.
//!
//! All numerical code is written against [`Real`], which f32 and f64 implement.
//! Tolerances elsewhere in the crate are tuned for f64; f32 works for the
//! algebraic pieces but will not meet the verification ladder.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point scalar: f32 or f64.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an f64 literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Entry type of a dense matrix: a real scalar or a complex number over one.
pub trait Element:
    Copy + NumAssign + std::ops::Neg<Output = Self> + Debug + Send + Sync + 'static
{
    type Real: Real;
    fn modulus(self) -> Self::Real;
    fn from_real(x: Self::Real) -> Self;
}

impl<T: Real> Element for T {
    type Real = T;
    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }
    #[inline]
    fn from_real(x: T) -> T {
        x
    }
}

impl<T: Real> Element for Complex<T> {
    type Real = T;
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn from_real(x: T) -> Self {
        Complex::new(x, T::zero())
    }
}
