//! Linear fractional maps between the disk, the upper half-plane and
//! the real-parameter family `rho_t`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Hermitian;
use crate::matrix::C64;

const POLE_TOL: f64 = 1e-300;

fn divide(num: C64, den: C64) -> Result<C64> {
    if den.norm() <= POLE_TOL {
        return Err(Error::PoleHit);
    }
    Ok(num / den)
}

/// `alpha(lambda) = i (1 + lambda) / (1 - lambda)`, disk to upper half-plane.
pub fn alpha(lambda: C64) -> Result<C64> {
    divide(C64::i() * (C64::new(1.0, 0.0) + lambda), C64::new(1.0, 0.0) - lambda)
}

/// `beta(z) = (z - i) / (z + i)`, upper half-plane to disk.
pub fn beta(z: C64) -> Result<C64> {
    divide(z - C64::i(), z + C64::i())
}

/// `rho_t(z) = (z + t) / (1 - t z)`.
pub fn rho(t: f64, z: C64) -> Result<C64> {
    divide(z + t, C64::new(1.0, 0.0) - z * t)
}

pub fn alpha_point(lambda: &[C64]) -> Result<Vec<C64>> {
    lambda.iter().map(|&l| alpha(l)).collect()
}

pub fn beta_point(z: &[C64]) -> Result<Vec<C64>> {
    z.iter().map(|&w| beta(w)).collect()
}

pub fn rho_point(t: f64, z: &[C64]) -> Result<Vec<C64>> {
    z.iter().map(|&w| rho(t, w)).collect()
}

/// `rho_t(S) = (S + t)(1 - t S)^{-1}` through the spectral calculus.
pub fn rho_hermitian(t: f64, s: &Hermitian) -> Result<Hermitian> {
    let e = s.eig();
    if e.values.iter().any(|&x| (1.0 - t * x).abs() <= POLE_TOL) {
        return Err(Error::PoleHit);
    }
    let vals: Vec<f64> = e.values.iter().map(|&x| (x + t) / (1.0 - t * x)).collect();
    Ok(e.reconstruct_with(&vals))
}
