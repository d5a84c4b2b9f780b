//! Computable noncommutative harmonic analysis on `SU_q(2)`.
//!
//! * [`qspecial`]: exact arithmetic in `q`, q-Pochhammer symbols and Gaussian binomials.
//! * [`polalg`]: the normal-form algebra `Pol(SU_q(2))`, Haar state, coproduct,
//!   modular group, heat semigroup and Fourier–Schur multipliers.
//! * [`peterweyl`]: irreducible corepresentation matrices and their orthogonality.
//! * [`fdlp`]: L_p norms, Kosaki embeddings and conditional expectations on matrix algebras.
//! * [`bmo`]: Markov semigroups and semigroup BMO seminorms.
//! * [`gnsmod`]: the GNS L_p-module of a ucp map.
//! * [`trunc`]: truncated operator model of `SU_q(2)` and the transference homomorphism.
//! * [`dilation`]: the fermionic Markov dilation of the heat semigroup.
//!
//! Floating-point layers are generic over [`Real`] (`f32`/`f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod bmo;
pub mod dilation;
pub mod error;
pub mod fdlp;
pub mod gnsmod;
pub mod linalg;
pub mod peterweyl;
pub mod polalg;
pub mod qspecial;
pub mod scalar;
pub mod trunc;

pub use error::{Error, Result};
pub use qspecial::{Laurent, QPolynomial1Var, QScalar};
pub use scalar::{Coeff, Real, Ring};

use num_complex::Complex;

pub type Complex64 = Complex<f64>;

/// `Pol(SU_q(2))` element with exact coefficients.
pub type ExactPol = polalg::PolElement<QScalar>;
/// `Pol(SU_q(2))` element with complex double coefficients.
pub type NumericPol = polalg::PolElement<Complex64>;
/// The exact algebra context (symbolic `q`).
pub type ExactSUq2 = polalg::SUq2<QScalar>;
/// The numeric algebra context at a fixed `q`.
pub type NumericSUq2 = polalg::SUq2<Complex64>;

pub type FdAlgebra64 = fdlp::FdAlgebra<f64>;
pub type Semigroup64 = bmo::Semigroup<f64>;
pub type TruncRep64 = trunc::TruncRep<f64>;
pub type FockRep64 = dilation::FockRep<f64>;
