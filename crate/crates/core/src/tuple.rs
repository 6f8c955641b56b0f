//! Calculus on commuting tuples of self-adjoint matrices.
//!
//! A generic commuting tuple `S = (S^1, ..., S^d)` is simultaneously
//! diagonalized as `S^r = Q diag(x_1^r, ..., x_n^r) Q^*`. Directions `Delta`
//! satisfying `[S^r, Delta^s] = [S^s, Delta^r]` are tangent to curves of
//! commuting tuples; along the curve `e^{tY}(S + t diag Delta)e^{-tY}` the
//! derivative of `f(S(t))` is the Löwner-type matrix of divided differences.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{shape_err, Error, Result};
use crate::linalg::{jacobi_eigen, Hermitian, Tolerances};
use crate::matrix::{expm_unitary, CMatrix, C64};

/// `d` Hermitian matrices of a common size `n` that pairwise commute.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutingTuple {
    mats: Vec<Hermitian>,
}

impl CommutingTuple {
    /// Checks `||[S^r, S^s]||_F <= tol_commute (1 + ||S^r|| ||S^s||)`.
    pub fn new(mats: Vec<Hermitian>, tol: &Tolerances) -> Result<Self> {
        let t = Self::new_unchecked(mats)?;
        let residual = t.commutator_residual();
        if residual > tol.tol_commute {
            return Err(Error::NotCommuting { residual });
        }
        Ok(t)
    }

    /// Only checks shapes.
    pub fn new_unchecked(mats: Vec<Hermitian>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidInput("tuple needs at least one matrix".into()));
        }
        let n = mats[0].dim();
        if n == 0 || mats.iter().any(|m| m.dim() != n) {
            return Err(shape_err!("tuple matrices must share a positive size"));
        }
        Ok(CommutingTuple { mats })
    }

    /// Diagonal tuple whose i-th joint eigenvalue is `points[i]`.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        let d = points.first().map(|p| p.len()).unwrap_or(0);
        if n == 0 || d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(shape_err!("points must be nonempty and share a dimension"));
        }
        let mats = (0..d)
            .map(|r| {
                let diag: Vec<f64> = points.iter().map(|p| p[r]).collect();
                Hermitian::from_real_diag(&diag)
            })
            .collect();
        Ok(CommutingTuple { mats })
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.mats[0].dim()
    }

    pub fn matrices(&self) -> &[Hermitian] {
        &self.mats
    }

    pub fn get(&self, r: usize) -> &Hermitian {
        &self.mats[r]
    }

    pub fn into_matrices(self) -> Vec<Hermitian> {
        self.mats
    }

    /// Largest scaled commutator `||[S^r,S^s]||_F / (1 + ||S^r||_F ||S^s||_F)`.
    pub fn commutator_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.d() {
            for s in r + 1..self.d() {
                let (a, b) = (&self.mats[r], &self.mats[s]);
                let c = a.commutator(b).frobenius_norm();
                worst = worst.max(c / (1.0 + a.frobenius_norm() * b.frobenius_norm()));
            }
        }
        worst
    }

    /// `Q S Q^*` componentwise.
    pub fn conjugate(&self, q: &CMatrix) -> CommutingTuple {
        let qa = q.adjoint();
        CommutingTuple {
            mats: self.mats.iter().map(|m| Hermitian::symmetrize(&(&(q * m.matrix()) * &qa))).collect(),
        }
    }

    /// `max_r ||S^r - T^r||_2`.
    pub fn distance(&self, other: &CommutingTuple) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| Hermitian::symmetrize(&(a.matrix() - b.matrix())).norm2())
            .fold(0.0, f64::max))
    }

    fn check_same_shape(&self, other: &CommutingTuple) -> Result<()> {
        if self.d() != other.d() || self.n() != other.n() {
            return Err(shape_err!(
                "tuples of shape (d={}, n={}) and (d={}, n={})",
                self.d(),
                self.n(),
                other.d(),
                other.n()
            ));
        }
        Ok(())
    }
}

/// Simultaneous eigenbasis `Q` and joint eigenvalues `points[i][r]`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSpectrum {
    q: CMatrix,
    points: Vec<Vec<f64>>,
}

impl JointSpectrum {
    /// Spectrum given directly in its diagonalizing basis (`Q = I`).
    pub fn diagonal(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new(CMatrix::identity(n), points)
    }

    pub fn new(q: CMatrix, points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        let d = points.first().map(|p| p.len()).unwrap_or(0);
        if n == 0 || d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(shape_err!("points must be nonempty and share a dimension"));
        }
        if q.rows() != n || q.cols() != n {
            return Err(shape_err!("basis is {}x{} for {} points", q.rows(), q.cols(), n));
        }
        Ok(JointSpectrum { q, points })
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn d(&self) -> usize {
        self.points[0].len()
    }

    /// Smallest Euclidean distance between distinct joint eigenvalues
    /// (`+inf` for `n = 1`).
    pub fn min_gap(&self) -> f64 {
        let mut gap = f64::INFINITY;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                gap = gap.min(dist(&self.points[i], &self.points[j]));
            }
        }
        gap
    }

    /// `S^r = Q diag(x^r) Q^*`.
    pub fn reconstruct(&self) -> CommutingTuple {
        let mats = (0..self.d())
            .map(|r| {
                let diag: Vec<f64> = self.points.iter().map(|p| p[r]).collect();
                Hermitian::from_real_diag(&diag).congruence(&self.q.adjoint())
            })
            .collect();
        CommutingTuple { mats }
    }

    /// Spectral functional calculus `Q diag(g(x_i)) Q^*`.
    pub fn apply(&self, g: impl Fn(&[f64]) -> f64) -> Hermitian {
        let vals: Vec<f64> = self.points.iter().map(|p| g(p)).collect();
        Hermitian::from_real_diag(&vals).congruence(&self.q.adjoint())
    }

    fn max_abs_coordinate(&self) -> f64 {
        self.points.iter().flatten().fold(0.0, |m: f64, x| m.max(x.abs()))
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A tuple of Hermitian matrices used as a tangent direction.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    mats: Vec<Hermitian>,
}

impl Direction {
    pub fn new(mats: Vec<Hermitian>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidInput("direction needs at least one matrix".into()));
        }
        let n = mats[0].dim();
        if mats.iter().any(|m| m.dim() != n) {
            return Err(shape_err!("direction matrices must share a size"));
        }
        Ok(Direction { mats })
    }

    pub fn zeros(d: usize, n: usize) -> Self {
        Direction { mats: vec![Hermitian::zeros(n); d] }
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.mats[0].dim()
    }

    pub fn matrices(&self) -> &[Hermitian] {
        &self.mats
    }

    pub fn get(&self, r: usize) -> &Hermitian {
        &self.mats[r]
    }

    /// `Q^* Delta Q` componentwise.
    pub fn in_basis(&self, q: &CMatrix) -> Direction {
        Direction { mats: self.mats.iter().map(|m| m.congruence(q)).collect() }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Direction, b: f64) -> Result<Direction> {
        if self.d() != other.d() || self.n() != other.n() {
            return Err(shape_err!("directions of different shapes"));
        }
        Ok(Direction {
            mats: self
                .mats
                .iter()
                .zip(&other.mats)
                .map(|(x, y)| Hermitian::symmetrize(&(&x.scale_real(a) + &y.scale_real(b))))
                .collect(),
        })
    }

    pub fn scale(&self, a: f64) -> Direction {
        Direction { mats: self.mats.iter().map(|m| Hermitian::symmetrize(&m.scale_real(a))).collect() }
    }

    /// Smallest eigenvalue over all components.
    pub fn min_eigenvalue(&self) -> f64 {
        self.mats.iter().map(|m| m.min_eigenvalue()).fold(f64::INFINITY, f64::min)
    }

    /// Largest spectral norm over all components.
    pub fn norm(&self) -> f64 {
        self.mats.iter().map(|m| m.norm2()).fold(0.0, f64::max)
    }

    /// First-order-commuting direction at `js` built in the diagonalizing
    /// basis: off-diagonal `Delta^r_ij = (x_j^r - x_i^r) kernel_ij`,
    /// diagonal `Delta^r_ii = diag[r][i]`, then rotated back by `Q`.
    pub fn from_kernel(js: &JointSpectrum, kernel: &CMatrix, diag: &[Vec<f64>]) -> Result<Direction> {
        let (n, d) = (js.n(), js.d());
        if kernel.rows() != n || kernel.cols() != n || diag.len() != d || diag.iter().any(|v| v.len() != n) {
            return Err(shape_err!("kernel/diagonal shapes do not match the spectrum"));
        }
        let x = js.points();
        let qa = js.q().adjoint();
        let mats = (0..d)
            .map(|r| {
                let m = CMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        C64::new(diag[r][i], 0.0)
                    } else if i < j {
                        kernel[(i, j)] * (x[j][r] - x[i][r])
                    } else {
                        (kernel[(j, i)] * (x[i][r] - x[j][r])).conj()
                    }
                });
                Hermitian::symmetrize(&m).congruence(&qa)
            })
            .collect();
        Ok(Direction { mats })
    }

    /// Adds `max(0, -lambda_min(Delta^r)) * I` to each component. Diagonal
    /// shifts keep a direction first-order commuting.
    pub fn shift_to_psd(&self) -> Direction {
        Direction {
            mats: self
                .mats
                .iter()
                .map(|m| {
                    let lo = m.min_eigenvalue();
                    if lo >= 0.0 {
                        m.clone()
                    } else {
                        Hermitian::symmetrize(&(m.matrix() + &CMatrix::identity(m.dim()).scale_real(-lo)))
                    }
                })
                .collect(),
        }
    }
}

/// A real `C^1` function on (part of) `R^d`.
pub trait SmoothFunction {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Closed-form gradient, when one is available.
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// Gradient values and whether they came from central differences.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
    pub numeric: bool,
}

/// Closed-form gradient if provided, otherwise central differences with
/// step `1e-6 (1 + |x^r|)`.
pub fn gradient_at<F: SmoothFunction + ?Sized>(f: &F, x: &[f64]) -> Gradient {
    if let Some(values) = f.gradient(x) {
        return Gradient { values, numeric: false };
    }
    Gradient { values: central_difference(f, x), numeric: true }
}

pub fn central_difference<F: SmoothFunction + ?Sized>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|r| {
            let h = 1e-6 * (1.0 + x[r].abs());
            p[r] = x[r] + h;
            let up = f.value(&p);
            p[r] = x[r] - h;
            let down = f.value(&p);
            p[r] = x[r];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Worst relative disagreement `|g - g_fd| / (1 + |g|)` between the
/// declared gradient and central differences over `probes`.
pub fn gradient_consistency<F: SmoothFunction + ?Sized>(f: &F, probes: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in probes {
        if let Some(g) = f.gradient(x) {
            for (a, b) in g.iter().zip(central_difference(f, x)) {
                worst = worst.max((a - b).abs() / (1.0 + a.abs()));
            }
        }
    }
    worst
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// [`SmoothFunction`] assembled from closures, with an optional box domain.
pub struct FnFunction {
    d: usize,
    value: ValueFn,
    gradient: Option<GradFn>,
    domain: Option<Vec<(f64, f64)>>,
}

impl FnFunction {
    pub fn new(d: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnFunction { d, value: Box::new(value), gradient: None, domain: None }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Box::new(g));
        self
    }

    /// Open box `prod (a^r, b^r)`.
    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Self {
        self.domain = Some(domain);
        self
    }
}

impl SmoothFunction for FnFunction {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        match &self.domain {
            None => true,
            Some(b) => b.iter().zip(x).all(|(&(lo, hi), &v)| v > lo && v < hi),
        }
    }
}

const JOINT_DIAG_SEED: u64 = 0x6a6f_696e_745f_6469;

/// Simultaneous diagonalization of a commuting tuple.
///
/// The eigenbasis of a fixed pseudo-random combination `sum_r c_r S^r` is
/// refined by joint Jacobi sweeps that minimize the total off-diagonal
/// energy of all `Q^* S^r Q`, which resolves accidental degeneracies of the
/// combination. Points are ordered by the combination's eigenvalues.
pub fn joint_diagonalize(s: &CommutingTuple, tol: &Tolerances) -> Result<JointSpectrum> {
    let residual = s.commutator_residual();
    if residual > tol.tol_commute {
        return Err(Error::NotCommuting { residual });
    }
    let (n, d) = (s.n(), s.d());
    let mut rng = ChaCha8Rng::seed_from_u64(JOINT_DIAG_SEED);
    let mut coeffs: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..1.5)).collect();
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    coeffs.iter_mut().for_each(|c| *c /= norm);
    let mut combo = CMatrix::zeros(n, n);
    for (c, m) in coeffs.iter().zip(s.matrices()) {
        combo = &combo + &m.scale_real(*c / (1.0 + m.frobenius_norm()));
    }
    let mut q = jacobi_eigen(&combo).vectors;
    let mut rotated: Vec<CMatrix> = s.matrices().iter().map(|m| m.congruence(&q).into_matrix()).collect();

    let scale: f64 = s.matrices().iter().map(|m| m.frobenius_norm()).fold(0.0, f64::max);
    let target = tol.tol_commute * (1.0 + scale);
    let mut off = total_off(&rotated);
    let mut sweeps = 0;
    while off > 1e-3 * target && sweeps < 50 {
        joint_jacobi_sweep(&mut rotated, &mut q);
        off = total_off(&rotated);
        sweeps += 1;
    }
    if off > target {
        return Err(Error::DiagonalizationFailed { off });
    }
    normalize_phases(&mut q);
    if s.matrices().iter().all(|m| m.is_real()) {
        q = q.real_part();
    }
    let rotated: Vec<Hermitian> = s.matrices().iter().map(|m| m.congruence(&q)).collect();
    let points = (0..n).map(|i| rotated.iter().map(|m| m[(i, i)].re).collect()).collect();
    JointSpectrum::new(q, points)
}

fn total_off(ms: &[CMatrix]) -> f64 {
    let mut s = 0.0;
    for m in ms {
        let n = m.rows();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
    }
    s.sqrt()
}

fn normalize_phases(q: &mut CMatrix) {
    let n = q.rows();
    for j in 0..n {
        if let Some(k) = (0..n).find(|&k| q[(k, j)].norm() > 1e-12) {
            let z = q[(k, j)];
            let ph = z.conj() / z.norm();
            for i in 0..n {
                q[(i, j)] *= ph;
            }
            q[(k, j)] = C64::new(q[(k, j)].norm(), 0.0);
        }
    }
}

// One sweep of complex joint Jacobi rotations (Cardoso-Souloumiac) over all
// index pairs.
fn joint_jacobi_sweep(ms: &mut [CMatrix], q: &mut CMatrix) {
    let n = q.rows();
    for p in 0..n {
        for r in p + 1..n {
            let mut g = [[0.0f64; 3]; 3];
            for m in ms.iter() {
                let h = [
                    m[(p, p)] - m[(r, r)],
                    m[(p, r)] + m[(r, p)],
                    (m[(r, p)] - m[(p, r)]) * C64::new(0.0, 1.0),
                ];
                for a in 0..3 {
                    for b in 0..3 {
                        g[a][b] += (h[a] * h[b].conj()).re;
                    }
                }
            }
            let e = jacobi_eigen(&CMatrix::from_real_rows(&g));
            let mut v = [e.vectors[(0, 2)].re, e.vectors[(1, 2)].re, e.vectors[(2, 2)].re];
            if v[0] < 0.0 {
                v = [-v[0], -v[1], -v[2]];
            }
            let c = (0.5 + v[0] / 2.0).sqrt();
            if c == 0.0 {
                continue;
            }
            let s = C64::new(v[1], -v[2]) * (0.5 / c);
            if s.norm() < 1e-16 {
                continue;
            }
            // G = [[c, -conj(s)], [s, c]] on columns (p, r).
            for m in ms.iter_mut() {
                let k = m.rows();
                for j in 0..k {
                    let a = m[(p, j)];
                    let b = m[(r, j)];
                    m[(p, j)] = a * c + b * s.conj();
                    m[(r, j)] = -(a * s) + b * c;
                }
                for i in 0..k {
                    let a = m[(i, p)];
                    let b = m[(i, r)];
                    m[(i, p)] = a * c + b * s;
                    m[(i, r)] = -(a * s.conj()) + b * c;
                }
            }
            for i in 0..n {
                let a = q[(i, p)];
                let b = q[(i, r)];
                q[(i, p)] = a * c + b * s;
                q[(i, r)] = -(a * s.conj()) + b * c;
            }
        }
    }
}

/// `true` iff all joint eigenvalues are more than `gap_tol` apart.
pub fn is_generic(js: &JointSpectrum, gap_tol: f64) -> bool {
    js.min_gap() > gap_tol
}

/// `max_{r != s} ||[S^r, Delta^s] - [S^s, Delta^r]||_F`.
pub fn check_first_order(s: &CommutingTuple, delta: &Direction) -> Result<f64> {
    if s.d() != delta.d() || s.n() != delta.n() {
        return Err(shape_err!("tuple and direction shapes differ"));
    }
    let mut worst: f64 = 0.0;
    for r in 0..s.d() {
        for t in 0..s.d() {
            if r == t {
                continue;
            }
            let a = s.get(r).commutator(delta.get(t));
            let b = s.get(t).commutator(delta.get(r));
            worst = worst.max((&a - &b).frobenius_norm());
        }
    }
    Ok(worst)
}

/// Direction expressed in the diagonalizing basis together with the
/// coordinate used for each off-diagonal divided difference.
struct AdaptedDirection {
    rotated: Vec<Hermitian>,
    pivot: Vec<Vec<usize>>,
}

fn adapt_direction(js: &JointSpectrum, delta: &Direction, tol: &Tolerances) -> Result<AdaptedDirection> {
    let (n, d) = (js.n(), js.d());
    if delta.d() != d || delta.n() != n {
        return Err(shape_err!("direction (d={}, n={}) vs spectrum (d={}, n={})", delta.d(), delta.n(), d, n));
    }
    let gap_tol = tol.tol_commute * (1.0 + js.max_abs_coordinate());
    let gap = js.min_gap();
    if gap <= gap_tol {
        return Err(Error::NotGeneric { gap });
    }
    let rotated: Vec<Hermitian> = delta.matrices().iter().map(|m| m.congruence(js.q())).collect();
    let x = js.points();
    let dscale = 1.0 + rotated.iter().map(|m| m.max_abs()).fold(0.0, f64::max);
    let wscale = 1.0 + 2.0 * js.max_abs_coordinate();
    let mut pivot = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w: Vec<f64> = (0..d).map(|r| x[j][r] - x[i][r]).collect();
            let best = (0..d)
                .max_by(|&a, &b| w[a].abs().partial_cmp(&w[b].abs()).unwrap_or(core::cmp::Ordering::Equal))
                .unwrap_or(0);
            pivot[i][j] = best;
            pivot[j][i] = best;
            // Delta^s_ij w^r = Delta^r_ij w^s for every pair (r, s).
            for r in 0..d {
                let resid = (rotated[r][(i, j)] * w[best] - rotated[best][(i, j)] * w[r]).norm();
                if resid > tol.tol_commute * dscale * wscale {
                    return Err(Error::InconsistentDirection { i, j, r, s: best, residual: resid });
                }
            }
        }
    }
    Ok(AdaptedDirection { rotated, pivot })
}

/// Skew-Hermitian generator `Y_ij = Delta^r_ij / (x_j^r - x_i^r)` in the
/// diagonalizing basis of `js`.
pub fn generator_y(js: &JointSpectrum, delta: &Direction, tol: &Tolerances) -> Result<CMatrix> {
    let ad = adapt_direction(js, delta, tol)?;
    Ok(generator_from(js, &ad))
}

fn generator_from(js: &JointSpectrum, ad: &AdaptedDirection) -> CMatrix {
    let n = js.n();
    let x = js.points();
    let mut y = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let r = ad.pivot[i][j];
            let v = ad.rotated[r][(i, j)] / (x[j][r] - x[i][r]);
            y[(i, j)] = v;
            y[(j, i)] = -v.conj();
        }
    }
    y
}

/// Point `S(t) = e^{tY} (S + t diag Delta) e^{-tY}` of the commuting curve
/// through `S` with velocity `Delta`, in the original basis.
pub fn curve_point(js: &JointSpectrum, delta: &Direction, t: f64, tol: &Tolerances) -> Result<CommutingTuple> {
    let ad = adapt_direction(js, delta, tol)?;
    let y = generator_from(js, &ad);
    let w = js.q() * &expm_unitary(&y.scale_real(t))?;
    let wa = w.adjoint();
    let x = js.points();
    let mats = (0..js.d())
        .map(|r| {
            let diag: Vec<f64> = (0..js.n()).map(|i| x[i][r] + t * ad.rotated[r][(i, i)].re).collect();
            Hermitian::from_real_diag(&diag).congruence(&wa)
        })
        .collect();
    CommutingTuple::new_unchecked(mats)
}

/// `f(S)` by joint diagonalization.
pub fn apply_function<F: SmoothFunction + ?Sized>(f: &F, s: &CommutingTuple, tol: &Tolerances) -> Result<Hermitian> {
    let js = joint_diagonalize(s, tol)?;
    apply_on_spectrum(f, &js)
}

/// `Q diag(f(x_i)) Q^*`, checking each joint eigenvalue against the domain.
pub fn apply_on_spectrum<F: SmoothFunction + ?Sized>(f: &F, js: &JointSpectrum) -> Result<Hermitian> {
    if f.dim() != js.d() {
        return Err(Error::DimensionMismatch(alloc::format!("function of {} variables on a {}-tuple", f.dim(), js.d())));
    }
    if let Some(index) = js.points().iter().position(|p| !f.in_domain(p)) {
        return Err(Error::DomainViolation { index });
    }
    Ok(js.apply(|p| f.value(p)))
}

/// `D_Delta f(S)`: divided differences off the diagonal, the directional
/// gradient on it, all in the diagonalizing basis; returned in the original
/// basis.
pub fn directional_derivative<F: SmoothFunction + ?Sized>(
    f: &F,
    js: &JointSpectrum,
    delta: &Direction,
    tol: &Tolerances,
) -> Result<Hermitian> {
    if f.dim() != js.d() {
        return Err(Error::DimensionMismatch(alloc::format!("function of {} variables on a {}-tuple", f.dim(), js.d())));
    }
    if let Some(index) = js.points().iter().position(|p| !f.in_domain(p)) {
        return Err(Error::DomainViolation { index });
    }
    let ad = adapt_direction(js, delta, tol)?;
    let (n, d) = (js.n(), js.d());
    let x = js.points();
    let fx: Vec<f64> = x.iter().map(|p| f.value(p)).collect();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        let g = gradient_at(f, &x[i]).values;
        let mut diag = 0.0;
        for r in 0..d {
            diag += ad.rotated[r][(i, i)].re * g[r];
        }
        m[(i, i)] = C64::new(diag, 0.0);
        for j in i + 1..n {
            let r = ad.pivot[i][j];
            let v = ad.rotated[r][(i, j)] * ((fx[j] - fx[i]) / (x[j][r] - x[i][r]));
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    Ok(Hermitian::symmetrize(&m).congruence(&js.q().adjoint()))
}

/// Outcome of the joint-eigenvalue perturbation bound.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationCheck {
    /// `max_mu min_p ||mu - x_p(S)||` over joint eigenvalues `mu` of `R`.
    pub max_min_distance: f64,
    /// `sqrt(d n) max_r ||R^r - S^r||_2`.
    pub bound: f64,
    pub holds: bool,
}

pub fn perturbation_check(r: &CommutingTuple, s: &CommutingTuple, tol: &Tolerances) -> Result<PerturbationCheck> {
    let diff = r.distance(s)?;
    let jr = joint_diagonalize(r, tol)?;
    let js = joint_diagonalize(s, tol)?;
    let max_min_distance = jr
        .points()
        .iter()
        .map(|mu| js.points().iter().map(|x| dist(mu, x)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let bound = ((r.d() * r.n()) as f64).sqrt() * diff;
    Ok(PerturbationCheck { max_min_distance, bound, holds: max_min_distance <= bound + tol.tol_commute })
}

/// Joint eigenvalues followed along a sampled path of commuting tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTracks {
    /// `tracks[j][k]` is the j-th joint eigenvalue at sample `k`.
    pub tracks: Vec<Vec<Vec<f64>>>,
    /// `ratios[k][j]`: `||X_j(t_{k+1}) - X_j(t_k)|| / ||R(t_{k+1}) - R(t_k)||`.
    pub ratios: Vec<Vec<f64>>,
    /// `sqrt(d n)`.
    pub bound: f64,
    pub max_ratio: f64,
    /// First sample where `sqrt(dn) ||R(t_k) - R(0)|| > gap / 3`; tracking
    /// stops there and the result is partial.
    pub genericity_lost_at: Option<usize>,
}

impl EigenTracks {
    pub fn within_bound(&self, tol: f64) -> bool {
        self.max_ratio <= self.bound + tol
    }
}

/// Greedy nearest-neighbour tracking of joint eigenvalues along `path`.
pub fn track_eigenpaths(path: &[CommutingTuple], tol: &Tolerances) -> Result<EigenTracks> {
    let first = path.first().ok_or_else(|| Error::InvalidInput("empty path".into()))?;
    let (n, d) = (first.n(), first.d());
    let js0 = joint_diagonalize(first, tol)?;
    let gap0 = js0.min_gap();
    if !is_generic(&js0, tol.tol_commute) {
        return Err(Error::NotGeneric { gap: gap0 });
    }
    let bound = ((d * n) as f64).sqrt();
    let mut tracks: Vec<Vec<Vec<f64>>> = js0.points().iter().map(|p| vec![p.clone()]).collect();
    let mut ratios = Vec::new();
    let mut max_ratio: f64 = 0.0;
    let mut genericity_lost_at = None;
    for k in 1..path.len() {
        let from_start = path[k].distance(first)?;
        if bound * from_start > gap0 / 3.0 {
            genericity_lost_at = Some(k);
            break;
        }
        let step = path[k].distance(&path[k - 1])?;
        let js = joint_diagonalize(&path[k], tol)?;
        let mut free: Vec<bool> = vec![true; n];
        let mut row = Vec::with_capacity(n);
        for track in tracks.iter_mut() {
            let prev = track.last().expect("tracks start nonempty").clone();
            let (best, dmin) = js
                .points()
                .iter()
                .enumerate()
                .filter(|(i, _)| free[*i])
                .map(|(i, p)| (i, dist(p, &prev)))
                .fold((usize::MAX, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
            free[best] = false;
            let ratio = if step > 0.0 { dmin / step } else if dmin <= tol.tol_commute { 0.0 } else { f64::INFINITY };
            max_ratio = max_ratio.max(ratio);
            row.push(ratio);
            track.push(js.points()[best].clone());
        }
        ratios.push(row);
    }
    Ok(EigenTracks { tracks, ratios, bound, max_ratio, genericity_lost_at })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = Hermitian::symmetrize(&a);
        expm_unitary(&h.scale(c64(0.0, 1.0))).unwrap()
    }

    fn swap() -> Hermitian {
        Hermitian::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    fn pair_13_24() -> JointSpectrum {
        JointSpectrum::diagonal(vec![vec![1.0, 3.0], vec![2.0, 4.0]]).unwrap()
    }

    #[test]
    fn diagonal_tuple_is_read_off() {
        let s = CommutingTuple::from_points(&[vec![1.0, 5.0], vec![-2.0, 0.5], vec![3.0, 3.0]]).unwrap();
        let js = joint_diagonalize(&s, &tol()).unwrap();
        let mut pts = js.points().to_vec();
        pts.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert_eq!(pts, vec![vec![-2.0, 0.5], vec![1.0, 5.0], vec![3.0, 3.0]]);
        for i in 0..3 {
            let nonzero: Vec<_> = (0..3).filter(|&k| js.q()[(k, i)].norm() > 1e-12).collect();
            assert_eq!(nonzero.len(), 1);
        }
    }

    #[test]
    fn planted_spectrum_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..7 {
            let planted: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
            let u = random_unitary(n, &mut rng);
            let js0 = JointSpectrum::new(u.adjoint(), planted.clone()).unwrap();
            let s = js0.reconstruct();
            let js = joint_diagonalize(&s, &tol()).unwrap();
            for p in &planted {
                let m = js.points().iter().map(|x| dist(x, p)).fold(f64::INFINITY, f64::min);
                assert!(m < 1e-9, "n={n} miss {m}");
            }
            let back = js.reconstruct();
            for r in 0..2 {
                assert!((back.get(r).matrix() - s.get(r).matrix()).frobenius_norm() < 1e-9);
            }
        }
    }

    #[test]
    fn accidental_degeneracy_is_resolved() {
        // S^1 has a repeated eigenvalue that S^2 splits.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_unitary(3, &mut rng);
        let planted = vec![vec![1.0, 0.0], vec![1.0, 2.0], vec![-1.0, 1.0]];
        let s = JointSpectrum::new(u, planted.clone()).unwrap().reconstruct();
        let js = joint_diagonalize(&s, &tol()).unwrap();
        for p in &planted {
            assert!(js.points().iter().any(|x| dist(x, p) < 1e-9));
        }
    }

    #[test]
    fn example_pair_t_joint_spectrum() {
        let t1 = Hermitian::from_real_rows(&[[4.0, 2.0], [2.0, 6.0]]).unwrap();
        let t2 = Hermitian::from_real_rows(&[[2.0, 2.0], [2.0, 4.0]]).unwrap();
        let t = CommutingTuple::new(vec![t1.clone(), t2.clone()], &tol()).unwrap();
        let js = joint_diagonalize(&t, &tol()).unwrap();
        // Scalar eigensolver on T^1, then read T^2 on the shared eigenvectors.
        let e = t1.eig();
        for k in 0..2 {
            let v = e.vectors.col(k);
            let t2v = t2.mul_vec(&v);
            let mu2 = crate::matrix::inner(&t2v, &v).re;
            let target = [e.values[k], mu2];
            assert!(js.points().iter().any(|x| dist(x, &target) < 1e-9));
        }
        assert!(js.points().iter().any(|x| (x[0] - (5.0 - 5f64.sqrt())).abs() < 1e-12));
    }

    #[test]
    fn non_commuting_rejected() {
        let a = Hermitian::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]).unwrap();
        let s = CommutingTuple::new_unchecked(vec![a, swap()]).unwrap();
        assert!(matches!(joint_diagonalize(&s, &tol()), Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn genericity() {
        let one = JointSpectrum::diagonal(vec![vec![0.0, 0.0]]).unwrap();
        assert!(is_generic(&one, 1.0));
        let js = pair_13_24();
        assert!(is_generic(&js, 1.4));
        assert!(!is_generic(&js, 1.5));
        let rep = JointSpectrum::diagonal(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(!is_generic(&rep, 0.0));
    }

    #[test]
    fn first_order_examples() {
        let s = pair_13_24().reconstruct();
        let id = Direction::new(vec![Hermitian::identity(2), Hermitian::identity(2)]).unwrap();
        assert_eq!(check_first_order(&s, &id).unwrap(), 0.0);

        let bad = Direction::new(vec![swap(), Hermitian::symmetrize(&swap().scale_real(2.0))]).unwrap();
        // entry (1,2): |1 * (3 - 4) - 2 * (1 - 2)| = 1 at two off-diagonal slots
        assert!((check_first_order(&s, &bad).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let good = Direction::new(vec![swap(), swap()]).unwrap();
        assert_eq!(check_first_order(&s, &good).unwrap(), 0.0);

        // Polynomials in the S^r commute with everything in the commutant.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = random_unitary(3, &mut rng);
        let s = JointSpectrum::new(u, vec![vec![0.1, 1.0], vec![0.7, -0.3], vec![-1.2, 0.4]]).unwrap().reconstruct();
        let (a, b) = (s.get(0).matrix(), s.get(1).matrix());
        let p1 = Hermitian::symmetrize(&(&(a * b) + &(a * a)));
        let p2 = Hermitian::symmetrize(&(&(b * b).scale_real(3.0) - a));
        let dir = Direction::new(vec![p1, p2]).unwrap();
        assert!(check_first_order(&s, &dir).unwrap() < 1e-12);
    }

    #[test]
    fn generator_examples() {
        let js = pair_13_24();
        let diag = Direction::new(vec![Hermitian::from_real_diag(&[1.0, 2.0]), Hermitian::from_real_diag(&[0.0, -1.0])]).unwrap();
        assert_eq!(generator_y(&js, &diag, &tol()).unwrap(), CMatrix::zeros(2, 2));

        let dir = Direction::new(vec![swap(), swap()]).unwrap();
        let y = generator_y(&js, &dir, &tol()).unwrap();
        assert_eq!(y, CMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]));
        let y3 = generator_y(&js, &dir.scale(3.0), &tol()).unwrap();
        assert_eq!(y3, y.scale_real(3.0));

        let bad = Direction::new(vec![swap(), Hermitian::symmetrize(&swap().scale_real(2.0))]).unwrap();
        assert!(matches!(generator_y(&js, &bad, &tol()), Err(Error::InconsistentDirection { .. })));
        let rep = JointSpectrum::diagonal(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(generator_y(&rep, &dir, &tol()), Err(Error::NotGeneric { .. })));
    }

    #[test]
    fn curve_point_basics() {
        let js = pair_13_24();
        let dir = Direction::new(vec![swap(), swap()]).unwrap();
        let s0 = curve_point(&js, &dir, 0.0, &tol()).unwrap();
        assert_eq!(s0, js.reconstruct());

        let h = 1e-4;
        let plus = curve_point(&js, &dir, h, &tol()).unwrap();
        let minus = curve_point(&js, &dir, -h, &tol()).unwrap();
        for r in 0..2 {
            let fd = (plus.get(r).matrix() - minus.get(r).matrix()).scale_real(0.5 / h);
            assert!((&fd - dir.get(r).matrix()).frobenius_norm() < 1e-7);
        }
        assert!(plus.commutator_residual() < 1e-14);

        let diag = Direction::new(vec![Hermitian::from_real_diag(&[1.0, 2.0]), Hermitian::from_real_diag(&[0.0, -1.0])]).unwrap();
        let st = curve_point(&js, &diag, 0.5, &tol()).unwrap();
        let line = JointSpectrum::diagonal(vec![vec![1.5, 3.0], vec![3.0, 3.5]]).unwrap().reconstruct();
        for r in 0..2 {
            assert!((st.get(r).matrix() - line.get(r).matrix()).frobenius_norm() < 1e-15);
        }
    }

    fn product() -> FnFunction {
        FnFunction::new(2, |x| x[0] * x[1]).with_gradient(|x| vec![x[1], x[0]])
    }

    #[test]
    fn apply_function_examples() {
        let s = pair_13_24().reconstruct();
        let one = FnFunction::new(2, |_| 1.0);
        assert_eq!(apply_function(&one, &s, &tol()).unwrap(), Hermitian::identity(2));
        let fxy = apply_function(&product(), &s, &tol()).unwrap();
        assert_eq!(fxy, Hermitian::from_real_diag(&[3.0, 8.0]));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unitary(4, &mut rng);
        let pts: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64 * 0.7 - 1.0, (i * i) as f64 * 0.3]).collect();
        let s = JointSpectrum::new(u, pts).unwrap().reconstruct();
        let x1 = FnFunction::new(2, |x| x[0]);
        let got = apply_function(&x1, &s, &tol()).unwrap();
        assert!((got.matrix() - s.get(0).matrix()).frobenius_norm() < 1e-9);

        let boxed = FnFunction::new(2, |x| x[0]).with_domain(vec![(0.0, 10.0), (0.0, 10.0)]);
        assert!(matches!(apply_function(&boxed, &s, &tol()), Err(Error::DomainViolation { .. })));
    }

    #[test]
    fn directional_derivative_examples() {
        let js = pair_13_24();
        let dir = Direction::new(vec![swap(), swap()]).unwrap();
        let d = directional_derivative(&product(), &js, &dir, &tol()).unwrap();
        // Delta has zero diagonal, so only the divided difference survives.
        assert_eq!(d, Hermitian::from_real_rows(&[[0.0, 5.0], [5.0, 0.0]]).unwrap());
        let shifted = dir.combine(1.0, &Direction::new(vec![Hermitian::identity(2), Hermitian::identity(2)]).unwrap(), 1.0).unwrap();
        let d = directional_derivative(&product(), &js, &shifted, &tol()).unwrap();
        assert_eq!(d, Hermitian::from_real_rows(&[[4.0, 5.0], [5.0, 6.0]]).unwrap());

        let x1 = FnFunction::new(2, |x| x[0]).with_gradient(|_| vec![1.0, 0.0]);
        let d = directional_derivative(&x1, &js, &dir, &tol()).unwrap();
        assert_eq!(d, swap());
    }

    fn fd_error(f: &FnFunction, js: &JointSpectrum, dir: &Direction, h: f64) -> f64 {
        let plus = apply_function(f, &curve_point(js, dir, h, &tol()).unwrap(), &tol()).unwrap();
        let minus = apply_function(f, &curve_point(js, dir, -h, &tol()).unwrap(), &tol()).unwrap();
        let fd = (plus.matrix() - minus.matrix()).scale_real(0.5 / h);
        let exact = directional_derivative(f, js, dir, &tol()).unwrap();
        (&fd - exact.matrix()).frobenius_norm()
    }

    #[test]
    fn derivative_matches_curve_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(3, &mut rng);
        let js = JointSpectrum::new(u.clone(), vec![vec![0.3, 1.0], vec![1.1, -0.4], vec![-0.8, 0.6]]).unwrap();
        let kernel = CMatrix::from_fn(3, 3, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let diag = vec![vec![0.2, -0.5, 1.0], vec![0.7, 0.1, -0.3]];
        let dir = Direction::from_kernel(&js, &kernel, &diag).unwrap();
        assert!(check_first_order(&js.reconstruct(), &dir).unwrap() < 1e-12);
        let f = FnFunction::new(2, |x| (x[0] * x[1]).sin() + x[0].exp())
            .with_gradient(|x| vec![x[1] * (x[0] * x[1]).cos() + x[0].exp(), x[0] * (x[0] * x[1]).cos()]);
        let (e1, e2) = (fd_error(&f, &js, &dir, 1e-2), fd_error(&f, &js, &dir, 5e-3));
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "h vs h/2 ratio {ratio}");
    }

    #[test]
    fn numeric_gradient_is_flagged() {
        let f = FnFunction::new(2, |x| x[0] * x[1]);
        let g = gradient_at(&f, &[2.0, 3.0]);
        assert!(g.numeric);
        assert!((g.values[0] - 3.0).abs() < 1e-8);
        assert!(gradient_consistency(&product(), &[vec![0.3, 0.2], vec![-1.0, 4.0]]) < 1e-4);
    }

    #[test]
    fn perturbation_examples() {
        let s = pair_13_24().reconstruct();
        let same = perturbation_check(&s, &s, &tol()).unwrap();
        assert_eq!(same.max_min_distance, 0.0);
        assert!(same.holds);
        let eps = 1e-3;
        let shifted = JointSpectrum::diagonal(vec![vec![1.0 + eps, 3.0 + eps], vec![2.0 + eps, 4.0 + eps]]).unwrap().reconstruct();
        let p = perturbation_check(&shifted, &s, &tol()).unwrap();
        assert!((p.max_min_distance - eps * 2f64.sqrt()).abs() < 1e-12);
        assert!((p.bound - 2.0 * eps).abs() < 1e-12);
        assert!(p.holds);
    }

    #[test]
    fn tracking_straight_lines() {
        let base = [vec![0.0, 0.0], vec![1.0, 0.5], vec![-1.0, 2.0]];
        let shift = [0.01, -0.02];
        let path: Vec<CommutingTuple> = (0..10)
            .map(|k| {
                let t = k as f64 * 0.01;
                let pts: Vec<Vec<f64>> = base.iter().map(|p| vec![p[0] + t * shift[0], p[1] + t * shift[1]]).collect();
                CommutingTuple::from_points(&pts).unwrap()
            })
            .collect();
        let tr = track_eigenpaths(&path, &tol()).unwrap();
        assert!(tr.genericity_lost_at.is_none());
        for (j, track) in tr.tracks.iter().enumerate() {
            for (k, p) in track.iter().enumerate() {
                let t = k as f64 * 0.01;
                assert!(dist(p, &[base[j][0] + t * shift[0], base[j][1] + t * shift[1]]) < 1e-12);
            }
        }
        assert!(tr.within_bound(1e-9));

        let constant = vec![path[0].clone(); 4];
        let tr = track_eigenpaths(&constant, &tol()).unwrap();
        assert!(tr.tracks.iter().all(|t| t.iter().all(|p| p == &t[0])));
        assert_eq!(tr.max_ratio, 0.0);
    }
}
