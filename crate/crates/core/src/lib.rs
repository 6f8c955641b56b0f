//! Numerics for multivariable matrix monotonicity.
//!
//! The crate is `no_std` (it needs `alloc`). It covers dense complex
//! Hermitian linear algebra, calculus on commuting tuples of self-adjoint
//! matrices, certification of the finite-point Löwner class by alternating
//! projections, and finite-dimensional transfer / self-adjoint / Cauchy
//! realizations of Pick-type functions.

#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod cert;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod realization;
pub mod tuple;

pub use error::{Error, Result};
pub use matrix::{CMatrix, C64};

/// Shorthand for a complex number with real and imaginary parts.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
