//! Heights, Siegel reduction, polarized abelian varieties and canonical
//! heights on elliptic curves, computed in exact or multiprecision
//! arithmetic.

pub mod abelian;
pub mod elliptic;
pub mod heights;
pub mod num;
pub mod siegel;

pub use num::{Complex, ComplexMatrix, IntMatrix, RatMatrix, RatPoly, RealMatrix, DEFAULT_PREC};
pub use rug::{Float, Integer, Rational};
