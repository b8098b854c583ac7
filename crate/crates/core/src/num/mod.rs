//! Exact and multiprecision numeric building blocks.

pub mod complex;
pub mod matrix;
pub mod poly;
pub mod roots;

pub use complex::Complex;
pub use matrix::{ComplexMatrix, FieldScalar, IntMatrix, Matrix, RatMatrix, RealMatrix, Scalar};
pub use poly::{RatPoly, RealRoot};
pub use roots::RootConvergenceError;

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 128;
