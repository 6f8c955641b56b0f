//! Transfer-function realizations `phi(lambda) = a + beta^* lambda (I - D lambda)^{-1} gamma`
//! on the polydisk, where `lambda` acts on the graded space blockwise.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::mobius::{alpha, beta_point};
use super::PickFunction;
use crate::error::{shape_err, Error, Result};
use crate::linalg::{GradedSpace, Hermitian};
use crate::matrix::{inner, solve, vec_norm, CMatrix, C64};

/// Contractive colligation `U = [[a, beta^*], [gamma, D]]` on `C (+) M`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferRealization {
    a: C64,
    beta: Vec<C64>,
    gamma: Vec<C64>,
    d: CMatrix,
    grading: GradedSpace,
    unitary: bool,
}

impl TransferRealization {
    /// Validates shapes, `||U||_2 <= 1 + tol` and, if `unitary`,
    /// `||U^* U - I||_F <= tol`.
    pub fn new(
        a: C64,
        beta: Vec<C64>,
        gamma: Vec<C64>,
        d: CMatrix,
        grading: GradedSpace,
        unitary: bool,
        tol: f64,
    ) -> Result<Self> {
        let m = grading.total();
        if beta.len() != m || gamma.len() != m || d.rows() != m || d.cols() != m {
            return Err(shape_err!("beta, gamma and D must match the graded dimension {m}"));
        }
        let tr = TransferRealization { a, beta, gamma, d, grading, unitary };
        let u = tr.block();
        let gram = Hermitian::symmetrize(&(&u.adjoint() * &u));
        let norm = gram.max_eigenvalue().max(0.0).sqrt();
        if norm > 1.0 + tol {
            return Err(Error::NotContraction { norm });
        }
        if unitary {
            let residual = tr.unitarity_defect();
            if residual > tol {
                return Err(Error::NotUnitary { residual });
            }
        }
        Ok(tr)
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn beta(&self) -> &[C64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[C64] {
        &self.gamma
    }

    pub fn d_matrix(&self) -> &CMatrix {
        &self.d
    }

    pub fn grading(&self) -> &GradedSpace {
        &self.grading
    }

    pub fn unitary_flag(&self) -> bool {
        self.unitary
    }

    /// The block matrix `U`.
    pub fn block(&self) -> CMatrix {
        let m = self.grading.total();
        CMatrix::from_fn(m + 1, m + 1, |i, j| match (i, j) {
            (0, 0) => self.a,
            (0, j) => self.beta[j - 1].conj(),
            (i, 0) => self.gamma[i - 1],
            (i, j) => self.d[(i - 1, j - 1)],
        })
    }

    /// `||U^* U - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let u = self.block();
        (&(&u.adjoint() * &u) - &CMatrix::identity(u.rows())).frobenius_norm()
    }

    /// `u_lambda = (I - D lambda)^{-1} gamma`.
    pub fn model_vector(&self, lambda: &[C64]) -> Result<Vec<C64>> {
        let lam = self.grading.expand(lambda)?;
        let m = lam.len();
        let lhs = CMatrix::from_fn(m, m, |i, j| {
            let id = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            id - self.d[(i, j)] * lam[j]
        });
        solve(&lhs, &self.gamma).map_err(|_| Error::SingularResolvent)
    }

    /// `phi(lambda)`.
    pub fn eval(&self, lambda: &[C64]) -> Result<C64> {
        let u = self.model_vector(lambda)?;
        let lam = self.grading.expand(lambda)?;
        let lu: Vec<C64> = lam.iter().zip(&u).map(|(l, x)| l * x).collect();
        Ok(self.a + inner(&lu, &self.beta))
    }

    /// `[1 - conj(phi(mu)) phi(lambda)] - <(1 - mu^* lambda) u_lambda, u_mu>`.
    pub fn model_residual(&self, lambda: &[C64], mu: &[C64]) -> Result<C64> {
        let (ul, um) = (self.model_vector(lambda)?, self.model_vector(mu)?);
        let (pl, pm) = (self.eval(lambda)?, self.eval(mu)?);
        let lam = self.grading.expand(lambda)?;
        let muv = self.grading.expand(mu)?;
        let weighted: Vec<C64> =
            ul.iter().zip(lam.iter().zip(&muv)).map(|(u, (l, m))| (C64::new(1.0, 0.0) - m.conj() * l) * u).collect();
        Ok(C64::new(1.0, 0.0) - pm.conj() * pl - inner(&weighted, &um))
    }

    /// Range test of `gamma` against `I - D tau` on the torus.
    pub fn bpoint_check(&self, tau: &[C64], tol: f64) -> Result<BPoint> {
        range_test(&self.d, &self.gamma, &self.grading, tau, tol)
    }
}

/// The upper half-plane function `F = alpha o phi o beta`.
impl PickFunction for TransferRealization {
    fn dim(&self) -> usize {
        self.grading.d()
    }

    fn eval(&self, z: &[C64]) -> Result<C64> {
        alpha(TransferRealization::eval(self, &beta_point(z)?)?)
    }
}

/// Outcome of the boundary range test.
#[derive(Clone, Debug, PartialEq)]
pub struct BPoint {
    pub is_bpoint: bool,
    /// Minimal-norm least-squares solution of `(I - D tau) u = gamma`.
    pub u: Option<Vec<C64>>,
    /// `||(I - D tau) u - gamma|| / ||gamma||`.
    pub residual: f64,
}

/// Least-squares solve of `(I - D tau) u = gamma`; `gamma` is in the range
/// when the relative residual is at most `tol`. Works on raw data, without
/// the contraction check.
pub fn range_test(d: &CMatrix, gamma: &[C64], grading: &GradedSpace, tau: &[C64], tol: f64) -> Result<BPoint> {
    let m = grading.total();
    if d.rows() != m || d.cols() != m || gamma.len() != m {
        return Err(shape_err!("D and gamma must match the graded dimension {m}"));
    }
    if tau.iter().any(|t| (t.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::InvalidInput("tau must lie on the torus".into()));
    }
    let t = grading.expand(tau)?;
    let a = CMatrix::from_fn(m, m, |i, j| {
        let id = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        id - d[(i, j)] * t[j]
    });
    let u = min_norm_solve(&a, gamma);
    let r: Vec<C64> = a.mul_vec(&u).iter().zip(gamma).map(|(x, g)| x - g).collect();
    let scale = vec_norm(gamma);
    let residual = if scale > 0.0 { vec_norm(&r) / scale } else { vec_norm(&r) };
    let is_bpoint = residual <= tol;
    Ok(BPoint { is_bpoint, u: is_bpoint.then_some(u), residual })
}

/// Pseudo-inverse solution from the eigendecomposition of `A^* A`.
fn min_norm_solve(a: &CMatrix, b: &[C64]) -> Vec<C64> {
    let e = Hermitian::symmetrize(&(&a.adjoint() * a)).eig();
    let top = e.values.last().copied().unwrap_or(0.0).max(1.0);
    let cutoff = 1e-16 * top;
    let rhs = a.adjoint().mul_vec(b);
    let n = a.cols();
    let mut u = alloc::vec![C64::new(0.0, 0.0); n];
    for (k, &s2) in e.values.iter().enumerate() {
        if s2 <= cutoff {
            continue;
        }
        let vk = e.vectors.col(k);
        let coef = inner(&rhs, &vk) / s2;
        for i in 0..n {
            u[i] += vk[i] * coef;
        }
    }
    u
}
