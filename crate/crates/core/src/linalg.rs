//! Hermitian linear algebra: Jacobi eigensolver, PSD tests, the Löwner
//! order on tuples, Schur products and the graded sum `S (.) I`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{shape_err, Error, Result};
use crate::matrix::{CMatrix, C64};

/// Numerical tolerances shared by the certification and calculus routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub tol_herm: f64,
    pub tol_psd: f64,
    pub tol_commute: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_herm: 1e-10,
            tol_psd: 1e-9,
            tol_commute: 1e-8,
            tol_residual: 1e-7,
            max_iter: 10_000,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.tol_herm, self.tol_psd, self.tol_commute, self.tol_residual];
        if all.iter().any(|t| !t.is_finite() || *t < 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidInput("tolerances must be finite and nonnegative, max_iter positive".into()));
        }
        Ok(())
    }
}

/// A square matrix that is Hermitian up to `tol_herm * (1 + ||H||_F)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tol(m, Self::DEFAULT_TOL)
    }

    pub fn with_tol(m: CMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(shape_err!("Hermitian matrix must be square, got {}x{}", m.rows(), m.cols()));
        }
        let residual = m.hermitian_defect();
        if residual > tol * (1.0 + m.frobenius_norm()) {
            return Err(Error::NonHermitian { residual });
        }
        Ok(Hermitian(m))
    }

    /// Symmetrizes `(M + M^*) / 2` without checking.
    pub fn symmetrize(m: &CMatrix) -> Self {
        Hermitian(m.hermitian_part())
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(CMatrix::from_real_rows(rows))
    }

    pub fn identity(n: usize) -> Self {
        Hermitian(CMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Hermitian(CMatrix::zeros(n, n))
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        Hermitian(CMatrix::from_real_diag(d))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `Q^* H Q`.
    pub fn congruence(&self, q: &CMatrix) -> Hermitian {
        Hermitian::symmetrize(&(&(&q.adjoint() * &self.0) * q))
    }

    pub fn eig(&self) -> Eigen {
        jacobi_eigen(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().values.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig().values.last().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Spectral norm, `max |lambda|`.
    pub fn norm2(&self) -> f64 {
        let e = self.eig();
        e.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// `g(H) = Q diag(g(lambda)) Q^*`.
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> Hermitian {
        let e = self.eig();
        let vals: Vec<f64> = e.values.iter().map(|&x| g(x)).collect();
        e.reconstruct_with(&vals)
    }

    /// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
    pub fn psd_projection(&self) -> Hermitian {
        self.apply(|x| x.max(0.0))
    }
}

impl Deref for Hermitian {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// Eigendecomposition `H = Q diag(values) Q^*`, values ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn reconstruct(&self) -> Hermitian {
        self.reconstruct_with(&self.values)
    }

    /// `Q diag(vals) Q^*` for replacement eigenvalues.
    pub fn reconstruct_with(&self, vals: &[f64]) -> Hermitian {
        let q = &self.vectors;
        let n = q.rows();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = C64::new(0.0, 0.0);
                for (k, &v) in vals.iter().enumerate() {
                    if v != 0.0 {
                        s += q[(i, k)] * q[(j, k)].conj() * v;
                    }
                }
                if i == j {
                    out[(i, i)] = C64::new(s.re, 0.0);
                } else {
                    out[(i, j)] = s;
                    out[(j, i)] = s.conj();
                }
            }
        }
        Hermitian(out)
    }
}

/// Cyclic complex Jacobi with threshold sweeps.
///
/// Assumes `a` is Hermitian (only the upper triangle and the real diagonal
/// matter). Each eigenvector's first component with modulus above `1e-12`
/// is rotated to be real positive. Real input yields real output.
pub fn jacobi_eigen(a: &CMatrix) -> Eigen {
    let n = a.rows();
    let real_input = a.is_real();
    let mut m = a.hermitian_part();
    let mut q = CMatrix::identity(n);
    let scale = m.frobenius_norm();
    if n > 1 && scale > 0.0 {
        let target = f64::EPSILON * scale;
        for sweep in 0..100 {
            let off: f64 = off_diagonal_norm(&m);
            if off <= target * 1e-2 {
                break;
            }
            // Large rotations first; threshold shrinks to zero after a few sweeps.
            let thresh = if sweep < 3 {
                0.2 * off / (n * n) as f64
            } else {
                0.0
            };
            for p in 0..n - 1 {
                for r in p + 1..n {
                    let apq = m[(p, r)];
                    let mag = apq.norm();
                    if mag == 0.0 || mag <= thresh {
                        continue;
                    }
                    let app = m[(p, p)].re;
                    let aqq = m[(r, r)].re;
                    if sweep > 3 && 100.0 * mag < f64::EPSILON * app.abs().min(aqq.abs()) {
                        m[(p, r)] = C64::new(0.0, 0.0);
                        m[(r, p)] = C64::new(0.0, 0.0);
                        continue;
                    }
                    let phase = apq / mag;
                    let theta = (aqq - app) / (2.0 * mag);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (theta * theta + 1.0).sqrt())
                    } else {
                        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    // V = [[c, s e^{i phi}], [-s e^{-i phi}, c]] on (p, r).
                    let vpq = phase * s;
                    let vqp = -(phase.conj() * s);
                    for k in 0..n {
                        let xp = m[(k, p)];
                        let xq = m[(k, r)];
                        m[(k, p)] = xp * c + xq * vqp;
                        m[(k, r)] = xp * vpq + xq * c;
                    }
                    for k in 0..n {
                        let xp = m[(p, k)];
                        let xq = m[(r, k)];
                        m[(p, k)] = xp * c + xq * vqp.conj();
                        m[(r, k)] = xp * vpq.conj() + xq * c;
                    }
                    m[(p, r)] = C64::new(0.0, 0.0);
                    m[(r, p)] = C64::new(0.0, 0.0);
                    m[(p, p)] = C64::new(app - t * mag, 0.0);
                    m[(r, r)] = C64::new(aqq + t * mag, 0.0);
                    for k in 0..n {
                        let xp = q[(k, p)];
                        let xq = q[(k, r)];
                        q[(k, p)] = xp * c + xq * vqp;
                        q[(k, r)] = xp * vpq + xq * c;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(core::cmp::Ordering::Equal));
    let values: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut vectors = CMatrix::from_fn(n, n, |i, j| q[(i, order[j])]);
    for j in 0..n {
        if let Some(k) = (0..n).find(|&k| vectors[(k, j)].norm() > 1e-12) {
            let z = vectors[(k, j)];
            let ph = z.conj() / z.norm();
            for i in 0..n {
                vectors[(i, j)] *= ph;
            }
            vectors[(k, j)] = C64::new(vectors[(k, j)].norm(), 0.0);
        }
    }
    if real_input {
        vectors = vectors.real_part();
    }
    Eigen { values, vectors }
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a checked Hermitian matrix.
pub fn eig_hermitian(h: &Hermitian) -> Eigen {
    h.eig()
}

pub fn min_eigenvalue(h: &Hermitian) -> f64 {
    h.min_eigenvalue()
}

pub fn is_psd(h: &Hermitian, tol: f64) -> bool {
    h.is_psd(tol)
}

/// Largest singular value of an arbitrary matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let g = Hermitian::symmetrize(&(&m.adjoint() * m));
    g.max_eigenvalue().max(0.0).sqrt()
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(m: &CMatrix) -> f64 {
    let (r, c) = (m.rows(), m.cols());
    // The eigenvalues of [[0, M], [M^*, 0]] are the singular values with both
    // signs, which keeps absolute accuracy near zero.
    let aug = CMatrix::from_fn(r + c, r + c, |i, j| match (i < r, j < r) {
        (true, false) => m[(i, j - r)],
        (false, true) => m[(j, i - r)].conj(),
        _ => C64::new(0.0, 0.0),
    });
    Hermitian::symmetrize(&aug).eig().values.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()))
}

/// `S <= T` in the coordinatewise Löwner order: `T^r - S^r >= -tol` for all r.
pub fn loewner_leq(s: &[Hermitian], t: &[Hermitian], tol: f64) -> Result<bool> {
    if s.len() != t.len() {
        return Err(shape_err!("tuple lengths {} and {}", s.len(), t.len()));
    }
    for (a, b) in s.iter().zip(t) {
        if a.dim() != b.dim() {
            return Err(shape_err!("matrix sizes {} and {}", a.dim(), b.dim()));
        }
    }
    Ok(s.iter()
        .zip(t)
        .all(|(a, b)| Hermitian::symmetrize(&(b.matrix() - a.matrix())).min_eigenvalue() >= -tol))
}

pub fn schur_product(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.schur(b)
}

/// Block structure `M = M^1 (+) ... (+) M^d` of a graded space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSpace {
    dims: Vec<usize>,
}

impl GradedSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidInput("grading needs d >= 1 blocks of positive size".into()));
        }
        Ok(GradedSpace { dims })
    }

    /// `d` blocks of size one.
    pub fn scalar(d: usize) -> Self {
        GradedSpace { dims: vec![1; d.max(1)] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn offset(&self, r: usize) -> usize {
        self.dims[..r].iter().sum()
    }

    /// Block label of every basis index.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total());
        for (r, &m) in self.dims.iter().enumerate() {
            out.extend(core::iter::repeat_n(r, m));
        }
        out
    }

    /// Diagonal of `z = z^1 P^1 + ... + z^d P^d`.
    pub fn expand(&self, z: &[C64]) -> Result<Vec<C64>> {
        if z.len() != self.d() {
            return Err(shape_err!("point has {} coordinates, grading has {} blocks", z.len(), self.d()));
        }
        Ok(self.labels().into_iter().map(|r| z[r]).collect())
    }

    /// The projection `P^r` as an `m x m` matrix.
    pub fn projection(&self, r: usize) -> CMatrix {
        let labels = self.labels();
        let diag: Vec<f64> = labels.iter().map(|&l| if l == r { 1.0 } else { 0.0 }).collect();
        CMatrix::from_real_diag(&diag)
    }
}

/// `S (.) I = sum_r S^r (x) P^r`, indexed `(i * m + a, j * m + b)`.
pub fn graded_sum(s: &[CMatrix], g: &GradedSpace) -> Result<CMatrix> {
    if s.len() != g.d() {
        return Err(shape_err!("tuple length {} vs grading with {} blocks", s.len(), g.d()));
    }
    let n = s.first().map(|m| m.rows()).unwrap_or(0);
    if s.iter().any(|m| m.rows() != n || m.cols() != n) {
        return Err(shape_err!("tuple matrices must share a square shape"));
    }
    let m = g.total();
    let labels = g.labels();
    let mut out = CMatrix::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..n {
            for (a, &r) in labels.iter().enumerate() {
                out[(i * m + a, j * m + a)] = s[r][(i, j)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Hermitian {
        let a = CMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        Hermitian::symmetrize(&a)
    }

    #[test]
    fn identity_eigen() {
        let e = Hermitian::identity(2).eig();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert_eq!(e.vectors, CMatrix::identity(2));
    }

    #[test]
    fn swap_matrix_eigenvalues() {
        let h = Hermitian::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let e = h.eig();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
        assert!(e.vectors.is_real());
        for j in 0..2 {
            assert!(e.vectors[(0, j)].re > 0.0);
        }
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=12 {
            let h = random_hermitian(n, &mut rng);
            let e = h.eig();
            let r = e.reconstruct();
            let res = (r.matrix() - h.matrix()).frobenius_norm();
            assert!(res <= 1e-10 * n as f64 * (1.0 + h.frobenius_norm()), "n={n} res={res}");
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let qq = &e.vectors.adjoint() * &e.vectors;
            assert!((&qq - &CMatrix::identity(n)).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn psd_examples() {
        assert!(Hermitian::zeros(3).is_psd(0.0));
        assert_eq!(Hermitian::zeros(3).min_eigenvalue(), 0.0);
        let a = Hermitian::from_real_rows(&[[2.0, 3.0], [3.0, 4.0]]).unwrap();
        assert!((a.min_eigenvalue() - (3.0 - 10f64.sqrt())).abs() < 1e-14);
        assert!(!a.is_psd(1e-9));
        let b = Hermitian::from_real_rows(&[[1.0, 0.5], [0.5, 0.25]]).unwrap();
        assert!(b.min_eigenvalue().abs() < 1e-15);
        assert!(b.is_psd(1e-9));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(Hermitian::new(m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn loewner_order_examples() {
        let s = [Hermitian::from_real_rows(&[[0.0]]).unwrap()];
        let t = [Hermitian::from_real_rows(&[[1.0]]).unwrap()];
        assert!(loewner_leq(&s, &t, 0.0).unwrap());
        assert!(loewner_leq(&s, &s, 0.0).unwrap());
        assert!(!loewner_leq(&t, &s, 1e-9).unwrap());
        let bad = [Hermitian::identity(2)];
        assert!(loewner_leq(&s, &bad, 0.0).is_err());
    }

    #[test]
    fn schur_examples() {
        let a = CMatrix::from_real_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let swap = CMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(
            schur_product(&a, &swap).unwrap(),
            CMatrix::from_real_rows(&[[0.0, 2.0], [3.0, 0.0]])
        );
        let ones = CMatrix::from_fn(2, 2, |_, _| c64(1.0, 0.0));
        assert_eq!(schur_product(&a, &ones).unwrap(), a);
        assert!(schur_product(&a, &CMatrix::identity(3)).is_err());
    }

    #[test]
    fn schur_of_psd_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(1..6);
            let a = random_hermitian(n, &mut rng);
            let b = random_hermitian(n, &mut rng);
            let pa = Hermitian::symmetrize(&(a.matrix() * a.matrix()));
            let pb = Hermitian::symmetrize(&(b.matrix() * b.matrix()));
            let p = Hermitian::symmetrize(&schur_product(&pa, &pb).unwrap());
            assert!(p.min_eigenvalue() >= -1e-12);
        }
    }

    #[test]
    fn graded_sum_cases() {
        let g = GradedSpace::new(vec![3]).unwrap();
        let s1 = CMatrix::from_real_rows(&[[1.0, 2.0], [2.0, 5.0]]);
        let out = graded_sum(core::slice::from_ref(&s1), &g).unwrap();
        assert_eq!(out, s1.kron(&CMatrix::identity(3)));

        let z = [c64(1.5, 0.0), c64(-2.0, 0.0), c64(0.25, 0.0)];
        let scalars: Vec<CMatrix> = z.iter().map(|&x| CMatrix::from_diag(&[x])).collect();
        let out = graded_sum(&scalars, &GradedSpace::scalar(3)).unwrap();
        assert_eq!(out, CMatrix::from_diag(&z));

        // d = 2, n = 2, dims (1, 1): entry ((i,a),(j,b)) = delta_ab S^a_ij.
        let a = CMatrix::from_real_rows(&[[1.0, 2.0], [2.0, 3.0]]);
        let b = CMatrix::from_real_rows(&[[4.0, 5.0], [5.0, 6.0]]);
        let out = graded_sum(&[a.clone(), b.clone()], &GradedSpace::scalar(2)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(out[(2 * i, 2 * j)], a[(i, j)]);
                assert_eq!(out[(2 * i + 1, 2 * j + 1)], b[(i, j)]);
                assert_eq!(out[(2 * i, 2 * j + 1)], c64(0.0, 0.0));
                assert_eq!(out[(2 * i + 1, 2 * j)], c64(0.0, 0.0));
            }
        }
        assert!(graded_sum(&[a], &GradedSpace::scalar(2)).is_err());
    }

    #[test]
    fn graded_sum_acts_componentwise() {
        // (sum_r z^r (x) P^r) eta = sum_r z^r eta^r for a block vector eta.
        let g = GradedSpace::new(vec![2, 1, 3]).unwrap();
        let z = [c64(0.5, 0.0), c64(-1.0, 0.0), c64(2.0, 0.0)];
        let scalars: Vec<CMatrix> = z.iter().map(|&x| CMatrix::from_diag(&[x])).collect();
        let lifted = graded_sum(&scalars, &g).unwrap();
        let eta: Vec<C64> = (0..6).map(|k| c64(k as f64 + 1.0, -(k as f64))).collect();
        let got = lifted.mul_vec(&eta);
        let expect: Vec<C64> = g.labels().iter().zip(&eta).map(|(&r, &e)| z[r] * e).collect();
        assert_eq!(got, expect);
    }
}
