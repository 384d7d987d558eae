//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
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

/// Values a sampled field can hold: a real scalar or a complex number over it.
pub trait FieldValue<T: Real>:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + num_traits::Zero
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::Mul<T, Output = Self>
    + std::ops::AddAssign
{
    fn magnitude(self) -> T;
    fn to_complex(self) -> Complex<T>;
}

impl<T: Real> FieldValue<T> for T {
    #[inline]
    fn magnitude(self) -> T {
        self.abs()
    }
    #[inline]
    fn to_complex(self) -> Complex<T> {
        Complex::new(self, T::zero())
    }
}

impl<T: Real> FieldValue<T> for Complex<T> {
    #[inline]
    fn magnitude(self) -> T {
        self.norm()
    }
    #[inline]
    fn to_complex(self) -> Complex<T> {
        self
    }
}

/// Binomial coefficient as a scalar.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    T::lit(acc.round())
}

pub fn factorial<T: Real>(n: usize) -> T {
    T::lit((1..=n).map(|k| k as f64).product::<f64>())
}
