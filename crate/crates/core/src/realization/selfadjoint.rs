//! Self-adjoint realizations of `F_t = rho_t o F o rho_t`,
//! `F_t(z) = c + <z v, v> + <(z - z0^*)(X - z)^{-1}(z - z0) v, v>`,
//! synthesized from unitary transfer realizations by a Cayley transform.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::mobius::{alpha, beta_point, rho, rho_point};
use super::{in_upper_half, PickFunction};
use crate::error::{shape_err, Error, Result};
use crate::linalg::{min_singular_value, GradedSpace, Hermitian};
use crate::matrix::{inner, solve, CMatrix, C64};

use super::transfer::TransferRealization;

#[derive(Clone, Debug, PartialEq)]
pub struct SelfAdjointRealization {
    pub c: f64,
    pub x: Hermitian,
    pub v: Vec<C64>,
    pub z0: Vec<C64>,
    pub grading: GradedSpace,
    /// The `rho_t` parameter this realization represents `F_t` for.
    pub t: f64,
}

impl SelfAdjointRealization {
    pub fn new(c: f64, x: Hermitian, v: Vec<C64>, z0: Vec<C64>, grading: GradedSpace, t: f64) -> Result<Self> {
        let m = grading.total();
        if x.dim() != m || v.len() != m || z0.len() != grading.d() {
            return Err(shape_err!("X, v and z0 must match the grading"));
        }
        if !in_upper_half(&z0) {
            return Err(Error::InvalidInput("z0 must lie in the upper polyhalf-plane".into()));
        }
        if !c.is_finite() || !t.is_finite() {
            return Err(Error::InvalidInput("c and t must be finite".into()));
        }
        Ok(SelfAdjointRealization { c, x, v, z0, grading, t })
    }

    /// Evaluates the realization formula at `z`.
    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        let zb = self.grading.expand(z)?;
        let z0b = self.grading.expand(&self.z0)?;
        let m = zb.len();
        let shifted = CMatrix::from_fn(m, m, |i, j| if i == j { self.x[(i, j)] - zb[i] } else { self.x[(i, j)] });
        let w: Vec<C64> = self.v.iter().enumerate().map(|(k, &vk)| (zb[k] - z0b[k]) * vk).collect();
        let s = solve(&shifted, &w).map_err(|_| Error::SingularResolvent)?;
        let left: Vec<C64> = s.iter().enumerate().map(|(k, &sk)| (zb[k] - z0b[k].conj()) * sk).collect();
        let zv: Vec<C64> = self.v.iter().enumerate().map(|(k, &vk)| zb[k] * vk).collect();
        Ok(C64::new(self.c, 0.0) + inner(&zv, &self.v) + inner(&left, &self.v))
    }
}

impl PickFunction for SelfAdjointRealization {
    fn dim(&self) -> usize {
        self.grading.d()
    }

    fn eval(&self, z: &[C64]) -> Result<C64> {
        SelfAdjointRealization::eval(self, z)
    }
}

/// Distance from `tau` to the spectrum of a unitary `U`, which is normal,
/// so this equals the smallest singular value of `U - tau`.
pub fn spectral_distance(u: &CMatrix, tau: C64) -> f64 {
    let shifted = CMatrix::from_fn(u.rows(), u.cols(), |i, j| if i == j { u[(i, j)] - tau } else { u[(i, j)] });
    min_singular_value(&shifted)
}

const TAU_CANDIDATES: usize = 64;
const MIN_TAU_DISTANCE: f64 = 1e-3;

/// Among 64 equispaced points of the unit circle (excluding -1), the one
/// farthest from the spectrum of `U`.
pub fn choose_tau(tr: &TransferRealization) -> C64 {
    let u = tr.block();
    (0..TAU_CANDIDATES)
        .filter(|&k| k != TAU_CANDIDATES / 2)
        .map(|k| C64::from_polar(1.0, core::f64::consts::TAU * k as f64 / TAU_CANDIDATES as f64))
        .map(|tau| (tau, spectral_distance(&u, tau)))
        .fold((C64::new(1.0, 0.0), -1.0), |best, cand| if cand.1 > best.1 { cand } else { best })
        .0
}

/// `t = -i (1 - tau) / (1 + tau)`, real for unimodular `tau != -1`.
pub fn rho_parameter(tau: C64) -> Result<f64> {
    let one = C64::new(1.0, 0.0);
    let den = one + tau;
    if den.norm() <= 1e-12 {
        return Err(Error::PoleHit);
    }
    Ok((-C64::i() * (one - tau) / den).re)
}

/// `rho_t o F o rho_t` for the transfer realization's `F = alpha o phi o beta`.
pub fn transfer_ft(tr: &TransferRealization, t: f64, z: &[C64]) -> Result<C64> {
    rho(t, PickFunction::eval(tr, &rho_point(t, z)?)?)
}

/// Builds the self-adjoint realization of `F_t` from a unitary colligation.
///
/// With `Y = -i (U - tau)^{-1}(U + tau)`, `X` is minus the compression of
/// `Y` to `M`; `v` is the model vector `(1 - tau lambda) u_lambda / (phi(lambda) - tau)`
/// at `lambda = beta(rho_t(z0))`; and `c = F_t(z0) - <z0 v, v>`.
pub fn synthesize(tr: &TransferRealization, z0: &[C64], tau: C64, tol: f64) -> Result<SelfAdjointRealization> {
    let residual = tr.unitarity_defect();
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    let g = tr.grading().clone();
    if z0.len() != g.d() {
        return Err(shape_err!("z0 has {} coordinates for {} blocks", z0.len(), g.d()));
    }
    if !in_upper_half(z0) {
        return Err(Error::InvalidInput("z0 must lie in the upper polyhalf-plane".into()));
    }
    if (tau.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("tau must be unimodular".into()));
    }
    let t = rho_parameter(tau)?;
    let u = tr.block();
    let distance = spectral_distance(&u, tau);
    if distance < MIN_TAU_DISTANCE {
        return Err(Error::TauTooCloseToSpectrum { distance });
    }

    let size = u.rows();
    let minus = CMatrix::from_fn(size, size, |i, j| if i == j { u[(i, j)] - tau } else { u[(i, j)] });
    let plus = CMatrix::from_fn(size, size, |i, j| if i == j { u[(i, j)] + tau } else { u[(i, j)] });
    let y = crate::matrix::Lu::factor(&minus).map_err(|_| Error::TauTooCloseToSpectrum { distance })?.solve_mat(&plus);
    let y = y.scale(-C64::i());
    let m = g.total();
    let x = Hermitian::symmetrize(&y.principal_block(1, m).scale_real(-1.0));

    let w = rho_point(t, z0)?;
    let lambda = beta_point(&w)?;
    let phi = tr.eval(&lambda)?;
    let denom = phi - tau;
    if denom.norm() <= 1e-300 {
        return Err(Error::PoleHit);
    }
    let model = tr.model_vector(&lambda)?;
    let lam = g.expand(&lambda)?;
    let v: Vec<C64> = model.iter().zip(&lam).map(|(uk, lk)| (C64::new(1.0, 0.0) - tau * lk) * uk / denom).collect();

    let ft = rho(t, alpha(phi)?)?;
    let z0b = g.expand(z0)?;
    let z0v: Vec<C64> = v.iter().zip(&z0b).map(|(vk, zk)| zk * vk).collect();
    let c = ft - inner(&z0v, &v);
    if c.im.abs() > tol.max(1e-8) * (1.0 + c.norm()) {
        return Err(Error::RealityViolation { imag: c.im });
    }
    SelfAdjointRealization::new(c.re, x, v, z0.to_vec(), g, t)
}
