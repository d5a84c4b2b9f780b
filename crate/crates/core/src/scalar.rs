//! Numeric scalar abstraction shared by every floating-point module.
//!
//! The matrix layers are generic over `T: Real`, which is implemented for
//! `f32` and `f64`. Exact computations use [`crate::qspecial::QScalar`].

use nalgebra::{ComplexField, DMatrix, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Machine epsilon of the type.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

pub type C<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Entrywise real part promoted to a complex matrix.
pub fn to_complex<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .map(|z| z.modulus())
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

pub fn is_finite<T: Real>(x: T) -> bool {
    ComplexField::is_finite(&x)
}

/// Commutative ring of coefficients.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + num_traits::Zero
    + num_traits::One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
    + Send
    + Sync
{
}

/// Coefficient field with a complex conjugation. `q` is always real, so
/// conjugation fixes every Laurent polynomial in `q`.
pub trait Coeff: Ring + std::ops::Div<Output = Self> {
    fn conj(&self) -> Self;
}

impl<T: Real> Ring for Complex<T> {}

impl<T: Real> Coeff for Complex<T> {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}
