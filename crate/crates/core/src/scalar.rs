//! Scalar abstraction shared by every numerical module.
//!
//! All physics code is written against [`Real`] so the same routines run in
//! `f32` (fast sweeps, smoke runs) and `f64` (everything with tight
//! tolerances). Complex amplitudes are `num_complex::Complex<T>`.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for finite input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in float")
    }

    /// A tolerance that is at least a few hundred ulps of the type.
    #[inline]
    fn tol(requested: f64) -> Self {
        Self::lit(requested).max(Self::epsilon() * Self::lit(256.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn ci<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// `e^{i phase}`.
#[inline]
pub fn expi<T: Real>(phase: T) -> C<T> {
    Complex::new(phase.cos(), phase.sin())
}

#[inline]
pub fn creal<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}
