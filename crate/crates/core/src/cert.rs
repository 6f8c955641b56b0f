//! Certification of the n-point Löwner class.
//!
//! A function sampled at distinct nodes `x_1, ..., x_n` in `R^d` belongs to
//! the class when there are PSD kernels `A^1, ..., A^d` with
//! `A^r(i,i) = d f/d x^r (x_i)` and
//! `sum_r (x_j^r - x_i^r) A^r(i,j) = f(x_j) - f(x_i)`.
//! [`certify`] searches for such kernels by alternating projections
//! (Douglas-Rachford by default, Dykstra on request) and, when the two
//! convex sets stay apart, turns the limiting
//! displacement into a direction along which `f` fails to be monotone.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{shape_err, Error, Result};
use crate::linalg::{Hermitian, Tolerances};
use crate::matrix::{CMatrix, C64};
use crate::tuple::{
    check_first_order, generator_y, gradient_at, CommutingTuple, Direction, JointSpectrum, SmoothFunction,
};

/// One sample: location, value and gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
}

/// Values and gradients of a function at `n` distinct points of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    d: usize,
    nodes: Vec<Node>,
}

impl SampledFunction {
    pub fn new(d: usize, nodes: Vec<Node>) -> Result<Self> {
        if d == 0 || nodes.is_empty() {
            return Err(Error::InvalidInput("need d >= 1 and at least one node".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.x.len() != d || node.grad.len() != d {
                return Err(Error::DimensionMismatch(alloc::format!("node {i} does not have dimension {d}")));
            }
            let finite = node.f.is_finite() && node.x.iter().chain(&node.grad).all(|v| v.is_finite());
            if !finite {
                return Err(Error::InvalidInput(alloc::format!("node {i} has a non-finite entry")));
            }
        }
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if nodes[i].x == nodes[j].x {
                    return Err(Error::DegenerateNodes { i, j });
                }
            }
        }
        Ok(SampledFunction { d, nodes })
    }

    /// Samples `f` (and its gradient, numerically if necessary) at `points`.
    pub fn from_function<F: SmoothFunction + ?Sized>(f: &F, points: &[Vec<f64>]) -> Result<Self> {
        let nodes = points
            .iter()
            .map(|x| Node { x: x.clone(), f: f.value(x), grad: gradient_at(f, x).values })
            .collect();
        SampledFunction::new(f.dim(), nodes)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|n| n.x.clone()).collect()
    }

    /// Joint spectrum of the diagonal tuple `S^r = diag(x_1^r, ..., x_n^r)`.
    pub fn spectrum(&self) -> JointSpectrum {
        JointSpectrum::diagonal(self.points()).expect("nodes were validated")
    }

    pub fn tuple(&self) -> CommutingTuple {
        CommutingTuple::from_points(&self.points()).expect("nodes were validated")
    }

    /// Reorders nodes so that node `k` of the result is node `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(shape_err!("permutation of length {} for {} nodes", perm.len(), self.n()));
        }
        let mut seen = vec![false; self.n()];
        for &p in perm {
            if p >= self.n() || core::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
        }
        Ok(SampledFunction { d: self.d, nodes: perm.iter().map(|&p| self.nodes[p].clone()).collect() })
    }

    fn weights(&self, i: usize, j: usize) -> (Vec<f64>, f64) {
        let (a, b) = (&self.nodes[i], &self.nodes[j]);
        ((0..self.d).map(|r| b.x[r] - a.x[r]).collect(), b.f - a.f)
    }
}

/// The one-variable Löwner matrix of divided differences.
pub fn loewner_matrix_1d(sf: &SampledFunction) -> Result<Hermitian> {
    if sf.d() != 1 {
        return Err(Error::DimensionMismatch(alloc::format!("expected d = 1, got {}", sf.d())));
    }
    let nodes = sf.nodes();
    let m = CMatrix::from_fn(sf.n(), sf.n(), |i, j| {
        let v = if i == j { nodes[i].grad[0] } else { (nodes[j].f - nodes[i].f) / (nodes[j].x[0] - nodes[i].x[0]) };
        C64::new(v, 0.0)
    });
    Ok(Hermitian::symmetrize(&m))
}

/// Residuals of a candidate certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateResiduals {
    pub min_psd_eig: Vec<f64>,
    /// Largest violation of the diagonal and divided-difference constraints.
    pub max_constraint_violation: f64,
}

impl CertificateResiduals {
    pub fn of(sf: &SampledFunction, kernels: &[Hermitian]) -> Self {
        CertificateResiduals {
            min_psd_eig: kernels.iter().map(|a| a.min_eigenvalue()).collect(),
            max_constraint_violation: diagonal_violation(sf, kernels).max(offdiagonal_violation(sf, kernels)),
        }
    }

    pub fn within(&self, tol: &Tolerances) -> bool {
        self.min_psd_eig.iter().all(|&e| e >= -tol.tol_psd) && self.max_constraint_violation <= tol.tol_residual
    }
}

fn diagonal_violation(sf: &SampledFunction, kernels: &[Hermitian]) -> f64 {
    let mut worst: f64 = 0.0;
    for (r, a) in kernels.iter().enumerate() {
        for (i, node) in sf.nodes().iter().enumerate() {
            worst = worst.max((a[(i, i)] - C64::new(node.grad[r], 0.0)).norm());
        }
    }
    worst
}

fn offdiagonal_violation(sf: &SampledFunction, kernels: &[Hermitian]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..sf.n() {
        for j in 0..sf.n() {
            if i == j {
                continue;
            }
            let (w, b) = sf.weights(i, j);
            let s: C64 = kernels.iter().zip(&w).map(|(a, &wr)| a[(i, j)] * wr).sum();
            worst = worst.max((s - C64::new(b, 0.0)).norm());
        }
    }
    worst
}

/// PSD kernels witnessing membership in the n-point Löwner class.
#[derive(Clone, Debug, PartialEq)]
pub struct LoewnerCertificate {
    pub kernels: Vec<Hermitian>,
    pub residuals: CertificateResiduals,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefutationStatus {
    Infeasible,
    Inconclusive,
}

/// Evidence against membership.
///
/// `witness` is a PSD, first-order-commuting direction at the node tuple,
/// scaled so that `max_r ||Delta^r||_2 = 1`, with `witness_min_eig` the
/// smallest eigenvalue of `D_Delta f(S)`. `raw_witness` is the direction
/// built from the separating matrix `k` alone (`max |K_ij| = 1`), which is
/// first-order commuting but in general not PSD.
#[derive(Clone, Debug, PartialEq)]
pub struct Refutation {
    pub status: RefutationStatus,
    pub k: Option<CMatrix>,
    pub witness: Option<Direction>,
    pub witness_min_eig: Option<f64>,
    pub raw_witness: Option<Direction>,
    pub raw_min_eig: Option<f64>,
    pub iterations: usize,
    pub final_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certification {
    Certified(LoewnerCertificate),
    Refuted(Refutation),
}

impl Certification {
    pub fn certificate(&self) -> Option<&LoewnerCertificate> {
        match self {
            Certification::Certified(c) => Some(c),
            Certification::Refuted(_) => None,
        }
    }

    pub fn refutation(&self) -> Option<&Refutation> {
        match self {
            Certification::Certified(_) => None,
            Certification::Refuted(r) => Some(r),
        }
    }
}

/// Distances `||x_k - y_k||` between the affine and PSD iterates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProjectionTrace {
    pub gaps: Vec<f64>,
}

const STALL_WINDOW: usize = 100;
const STALL_RELATIVE: f64 = 1e-10;
const POLISH_EVERY: usize = 25;
const POLISH_SPARSE_AFTER: usize = 200;
const POLISH_SPARSE_EVERY: usize = 250;
const POLISH_STEPS: usize = 30;
const POLISH_TARGET: f64 = 1e-13;
const POLISH_PATIENCE: usize = 6;
const POLISH_FLOOR: f64 = 1e-3;
const WITNESS_SEED: u64 = 0x0077_6974_6e65_7373;
const WITNESS_SAMPLES: usize = 2000;

/// Splitting scheme used by [`certify_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    /// Averaged alternating reflections: `y = P_psd(z)`,
    /// `x = P_aff(2y - z)`, `z += x - y`.
    #[default]
    DouglasRachford,
    /// Dykstra's alternating projections with a correction on the PSD step.
    Dykstra,
}

/// Searches for a certificate with the default method.
pub fn certify(sf: &SampledFunction, tol: &Tolerances) -> Result<Certification> {
    certify_with(sf, tol, Method::default()).map(|(c, _)| c)
}

/// Alternates between the PSD product and the affine constraint set,
/// returning the first iterate that satisfies every certificate condition.
/// The PSD iterate is periodically refined by factored Gauss-Newton steps.
/// When the distance between the two iterates stalls above
/// `tol_residual`, the displacement `x - y` becomes a refutation.
pub fn certify_with(sf: &SampledFunction, tol: &Tolerances, method: Method) -> Result<(Certification, ProjectionTrace)> {
    tol.validate()?;
    let (n, d) = (sf.n(), sf.d());
    let mut x = least_norm_start(sf);
    let mut z = x.clone();
    let mut p = vec![CMatrix::zeros(n, n); d];
    let mut trace = ProjectionTrace::default();

    for iter in 0..=tol.max_iter {
        if let Some(cert) = accept(sf, &x, iter, tol) {
            return Ok((Certification::Certified(cert), trace));
        }
        if iter == tol.max_iter {
            break;
        }
        let y = match method {
            Method::DouglasRachford => {
                let y = project_psd(&z);
                let mut reflected: Vec<CMatrix> = y.iter().zip(&z).map(|(a, b)| &a.scale_real(2.0) - b).collect();
                project_affine(sf, &mut reflected);
                x = reflected;
                for r in 0..d {
                    z[r] = &(&z[r] + &x[r]) - &y[r];
                }
                y
            }
            Method::Dykstra => {
                let shifted: Vec<CMatrix> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
                let y = project_psd(&shifted);
                for r in 0..d {
                    p[r] = &shifted[r] - &y[r];
                }
                x = y.clone();
                project_affine(sf, &mut x);
                y
            }
        };
        let gap = tuple_distance(&x, &y);
        trace.gaps.push(gap);
        if let Some(cert) = accept(sf, &y, iter + 1, tol) {
            return Ok((Certification::Certified(cert), trace));
        }
        if polish_due(iter + 1) {
            if let Some(cert) = polish(sf, &y, tol).and_then(|a| accept(sf, &a, iter + 1, tol)) {
                return Ok((Certification::Certified(cert), trace));
            }
        }

        let k = trace.gaps.len();
        if k > STALL_WINDOW && gap > tol.tol_residual {
            let old = trace.gaps[k - 1 - STALL_WINDOW];
            if (old - gap).abs() <= STALL_RELATIVE * gap {
                let displacement: Vec<CMatrix> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                let refutation = refute(sf, &displacement, iter + 1, gap, tol)?;
                return Ok((Certification::Refuted(refutation), trace));
            }
        }
    }

    let final_distance = trace.gaps.last().copied().unwrap_or(0.0);
    let refutation = Refutation {
        status: RefutationStatus::Inconclusive,
        k: None,
        witness: None,
        witness_min_eig: None,
        raw_witness: None,
        raw_min_eig: None,
        iterations: tol.max_iter,
        final_distance,
    };
    Ok((Certification::Refuted(refutation), trace))
}

/// Every 25 iterations at first, then every 250.
fn polish_due(k: usize) -> bool {
    k % POLISH_EVERY == 0 && (k <= POLISH_SPARSE_AFTER || k % POLISH_SPARSE_EVERY == 0)
}

/// Factored Gauss-Newton refinement.
///
/// The kernels of a certificate typically sit on the boundary of the PSD
/// cone, where alternating projections converge slowly. Writing
/// `A^r = L_r L_r^*`, starting from the square root of the PSD iterate, the
/// constraints become a quadratic system in `L` whose minimum-norm Newton
/// steps converge fast near a solution. Every iterate is PSD by
/// construction; the caller still verifies the result.
fn polish(sf: &SampledFunction, y: &[CMatrix], tol: &Tolerances) -> Option<Vec<CMatrix>> {
    let mut l: Vec<CMatrix> = y
        .iter()
        .map(|m| {
            let e = Hermitian::symmetrize(m).eig();
            let top = e.values.last().copied().unwrap_or(0.0).max(0.0);
            let floor = POLISH_FLOOR * top.sqrt();
            let n = e.values.len();
            CMatrix::from_fn(n, n, |i, a| e.vectors[(i, a)] * e.values[a].max(0.0).sqrt().max(floor))
        })
        .collect();
    let zero_offset = constraint_residuals(sf, &vec![CMatrix::zeros(sf.n(), sf.n()); sf.d()]);
    let (mut best, mut best_step) = (f64::INFINITY, 0);
    for step in 0..POLISH_STEPS {
        let a = gram(&l);
        let res = constraint_residuals(sf, &a);
        let worst = res.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if worst <= POLISH_TARGET {
            return Some(a);
        }
        if worst < best {
            (best, best_step) = (worst, step);
        } else if step - best_step >= POLISH_PATIENCE {
            break;
        }
        newton_step(sf, &mut l, &res, &zero_offset)?;
    }
    let a = gram(&l);
    constraint_residuals(sf, &a).iter().all(|v| v.abs() <= tol.tol_residual).then_some(a)
}

fn gram(l: &[CMatrix]) -> Vec<CMatrix> {
    l.iter().map(|f| f * &f.adjoint()).collect()
}

/// Real constraint residuals: diagonals, then real and imaginary parts of
/// the divided-difference conditions.
fn constraint_residuals(sf: &SampledFunction, a: &[CMatrix]) -> Vec<f64> {
    let n = sf.n();
    let mut out = Vec::with_capacity(sf.d() * n + n * (n - 1));
    for (i, node) in sf.nodes().iter().enumerate() {
        for (r, ar) in a.iter().enumerate() {
            out.push(ar[(i, i)].re - node.grad[r]);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (w, b) = sf.weights(i, j);
            let dot: C64 = a.iter().zip(&w).map(|(ar, &wr)| ar[(i, j)] * wr).sum();
            out.push(dot.re - b);
            out.push(dot.im);
        }
    }
    out
}

/// `L <- L - J^+ res` with `J` the Jacobian of the residuals in the real
/// and imaginary parts of every entry of every `L_r`.
fn newton_step(sf: &SampledFunction, l: &mut [CMatrix], res: &[f64], zero_offset: &[f64]) -> Option<()> {
    let n = sf.n();
    let d = l.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(2 * d * n * n);
    for r in 0..d {
        for p in 0..n {
            for a in 0..n {
                for unit in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    // dA = dL L^* + L dL^* with dL = unit e_p e_a^T.
                    let lr = &l[r];
                    let da = CMatrix::from_fn(n, n, |i, j| {
                        let mut v = C64::new(0.0, 0.0);
                        if i == p {
                            v += unit * lr[(j, a)].conj();
                        }
                        if j == p {
                            v += lr[(i, a)] * unit.conj();
                        }
                        v
                    });
                    let mut tangent = vec![CMatrix::zeros(n, n); d];
                    tangent[r] = da;
                    let col = constraint_residuals(sf, &tangent);
                    columns.push(col.iter().zip(zero_offset).map(|(c, o)| c - o).collect());
                }
            }
        }
    }
    let rows = res.len();
    let jjt = CMatrix::from_fn(rows, rows, |i, j| C64::new(columns.iter().map(|c| c[i] * c[j]).sum(), 0.0));
    let e = Hermitian::symmetrize(&jjt).eig();
    let top = e.values.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let mut lambda = vec![0.0; rows];
    for (k, &v) in e.values.iter().enumerate() {
        if v > 1e-13 * top {
            let coef: f64 = (0..rows).map(|i| e.vectors[(i, k)].re * res[i]).sum::<f64>() / v;
            for (i, li) in lambda.iter_mut().enumerate() {
                *li += coef * e.vectors[(i, k)].re;
            }
        }
    }
    let mut q = 0;
    for lr in l.iter_mut() {
        for p in 0..n {
            for a in 0..n {
                let re: f64 = columns[q].iter().zip(&lambda).map(|(c, x)| c * x).sum();
                let im: f64 = columns[q + 1].iter().zip(&lambda).map(|(c, x)| c * x).sum();
                lr[(p, a)] -= C64::new(re, im);
                q += 2;
            }
        }
    }
    Some(())
}

fn accept(sf: &SampledFunction, mats: &[CMatrix], iterations: usize, tol: &Tolerances) -> Option<LoewnerCertificate> {
    let kernels: Vec<Hermitian> = mats.iter().map(Hermitian::symmetrize).collect();
    let residuals = CertificateResiduals::of(sf, &kernels);
    residuals.within(tol).then_some(LoewnerCertificate { kernels, residuals, iterations })
}

fn project_psd(mats: &[CMatrix]) -> Vec<CMatrix> {
    mats.iter().map(|m| Hermitian::symmetrize(m).psd_projection().into_matrix()).collect()
}

fn tuple_distance(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).frobenius_norm().powi(2)).sum::<f64>().sqrt()
}

/// `A^r(i,j) = b w_r / |w|^2`, diagonals set to the gradients.
fn least_norm_start(sf: &SampledFunction) -> Vec<CMatrix> {
    let mut a = vec![CMatrix::zeros(sf.n(), sf.n()); sf.d()];
    project_affine(sf, &mut a);
    a
}

/// Orthogonal projection onto the affine constraint set.
fn project_affine(sf: &SampledFunction, a: &mut [CMatrix]) {
    let n = sf.n();
    for (i, node) in sf.nodes().iter().enumerate() {
        for (r, ar) in a.iter_mut().enumerate() {
            ar[(i, i)] = C64::new(node.grad[r], 0.0);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (w, b) = sf.weights(i, j);
            let ww: f64 = w.iter().map(|v| v * v).sum();
            let dot: C64 = a.iter().zip(&w).map(|(ar, &wr)| ar[(i, j)] * wr).sum();
            let excess = (dot - C64::new(b, 0.0)) / ww;
            for (ar, &wr) in a.iter_mut().zip(&w) {
                let v = ar[(i, j)] - excess * wr;
                ar[(i, j)] = v;
                ar[(j, i)] = v.conj();
            }
        }
    }
}

/// Builds the refutation from the limiting displacement `v = x - y`.
///
/// `-v` is PSD (it is normal to the PSD product at `y`) and its off-diagonal
/// part lies along the constraint normals `w`, so it is a first-order
/// commuting direction with `1^T D_{-v} f 1 = -||v||^2`.
fn refute(sf: &SampledFunction, v: &[CMatrix], iterations: usize, gap: f64, tol: &Tolerances) -> Result<Refutation> {
    let (n, d) = (sf.n(), sf.d());
    let js = sf.spectrum();
    let mut zeta = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let (w, _) = sf.weights(i, j);
            let ww: f64 = w.iter().map(|x| x * x).sum();
            let s: C64 = v.iter().zip(&w).map(|(vr, &wr)| -vr[(i, j)] * wr).sum();
            zeta[(i, j)] = s / ww;
        }
    }
    let diag: Vec<Vec<f64>> = (0..d).map(|r| (0..n).map(|i| -v[r][(i, i)].re).collect()).collect();
    let mut best = Direction::from_kernel(&js, &zeta, &diag)
        .ok()
        .and_then(|dir| normalized_psd_witness(sf, &dir, tol));
    if best.as_ref().is_none_or(|(_, m)| *m >= -tol.tol_psd) {
        if let Some(found) = random_psd_search(sf, tol) {
            if best.as_ref().is_none_or(|(_, m)| found.1 < *m) {
                best = Some(found);
            }
        }
    }

    let mut k = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            k[(j, i)] = C64::new(zeta[(i, j)].re, 0.0);
            k[(i, j)] = C64::new(-zeta[(i, j)].re, 0.0);
        }
    }
    let kmax = k.max_abs();
    let (k, raw) = if kmax > 0.0 {
        let k = k.scale_real(1.0 / kmax);
        let plus = refutation_witness(sf, &k, tol)?;
        let minus = refutation_witness(sf, &-&k, tol)?;
        if minus.min_eig < plus.min_eig {
            (Some(-&k), Some(minus))
        } else {
            (Some(k), Some(plus))
        }
    } else {
        (None, None)
    };

    let infeasible = best.as_ref().is_some_and(|(_, m)| *m < -tol.tol_psd);
    let (witness, witness_min_eig) = match best {
        Some((dir, m)) if infeasible => (Some(dir), Some(m)),
        _ => (None, None),
    };
    Ok(Refutation {
        status: if infeasible { RefutationStatus::Infeasible } else { RefutationStatus::Inconclusive },
        k,
        witness,
        witness_min_eig,
        raw_min_eig: raw.as_ref().map(|w| w.min_eig),
        raw_witness: raw.map(|w| w.direction),
        iterations,
        final_distance: gap,
    })
}

/// Shifts `dir` to be PSD, scales it to unit norm and evaluates it.
fn normalized_psd_witness(sf: &SampledFunction, dir: &Direction, tol: &Tolerances) -> Option<(Direction, f64)> {
    let psd = dir.shift_to_psd();
    let norm = psd.norm();
    if !(norm > 0.0) {
        return None;
    }
    let unit = psd.scale(1.0 / norm);
    let m = sampled_derivative(sf, &unit, tol).ok()?.min_eigenvalue();
    Some((unit, m))
}

fn random_psd_search(sf: &SampledFunction, tol: &Tolerances) -> Option<(Direction, f64)> {
    let (n, d) = (sf.n(), sf.d());
    let js = sf.spectrum();
    let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEED);
    let mut best: Option<(Direction, f64)> = None;
    for _ in 0..WITNESS_SAMPLES {
        let kernel = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let diag: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let Ok(dir) = Direction::from_kernel(&js, &kernel, &diag) else { continue };
        if let Some(found) = normalized_psd_witness(sf, &dir, tol) {
            if best.as_ref().is_none_or(|(_, m)| found.1 < *m) {
                best = Some(found);
            }
        }
    }
    best
}

/// Direction built from a separating matrix, with its derivative data.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelWitness {
    pub direction: Direction,
    pub min_eig: f64,
    pub is_psd: bool,
}

/// `Delta^r_ij = (x_j^r - x_i^r) K_ji` and the smallest eigenvalue of
/// `D_Delta f(S)` at the node tuple.
pub fn refutation_witness(sf: &SampledFunction, k: &CMatrix, tol: &Tolerances) -> Result<KernelWitness> {
    let n = sf.n();
    if k.rows() != n || k.cols() != n {
        return Err(shape_err!("K is {}x{} for {} nodes", k.rows(), k.cols(), n));
    }
    let imag = k.data().iter().fold(0.0, |m: f64, z| m.max(z.im.abs()));
    let skew = (k + &k.transpose()).max_abs();
    let residual = imag.max(skew);
    if residual > tol.tol_herm * (1.0 + k.max_abs()) {
        return Err(Error::NotSkewSymmetric { residual });
    }
    let points = sf.points();
    let mats = (0..sf.d())
        .map(|r| {
            let m = CMatrix::from_fn(n, n, |i, j| C64::new((points[j][r] - points[i][r]) * k[(j, i)].re, 0.0));
            Hermitian::symmetrize(&m)
        })
        .collect();
    let direction = Direction::new(mats)?;
    let min_eig = sampled_derivative(sf, &direction, tol)?.min_eigenvalue();
    let is_psd = direction.min_eigenvalue() >= -tol.tol_psd;
    Ok(KernelWitness { direction, min_eig, is_psd })
}

/// `D_Delta f(S)` at the node tuple, from the sampled values and gradients.
pub fn sampled_derivative(sf: &SampledFunction, delta: &Direction, tol: &Tolerances) -> Result<Hermitian> {
    let js = sf.spectrum();
    let y = generator_y(&js, delta, tol)?;
    let nodes = sf.nodes();
    let n = sf.n();
    let m = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let s: f64 = (0..sf.d()).map(|r| delta.get(r)[(i, i)].re * nodes[i].grad[r]).sum();
            C64::new(s, 0.0)
        } else {
            y[(i, j)] * (nodes[j].f - nodes[i].f)
        }
    });
    Ok(Hermitian::symmetrize(&m))
}

/// Pass/fail per certificate condition, recomputed from scratch.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub min_psd_eig: Vec<f64>,
    pub psd_ok: bool,
    pub diagonal_violation: f64,
    pub diagonal_ok: bool,
    pub offdiagonal_violation: f64,
    pub offdiagonal_ok: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.psd_ok && self.diagonal_ok && self.offdiagonal_ok
    }
}

pub fn verify_certificate(sf: &SampledFunction, kernels: &[Hermitian], tol: &Tolerances) -> Result<VerificationReport> {
    if kernels.len() != sf.d() || kernels.iter().any(|a| a.dim() != sf.n()) {
        return Err(shape_err!("expected {} kernels of size {}", sf.d(), sf.n()));
    }
    let min_psd_eig: Vec<f64> = kernels.iter().map(|a| a.min_eigenvalue()).collect();
    let diagonal_violation = diagonal_violation(sf, kernels);
    let offdiagonal_violation = offdiagonal_violation(sf, kernels);
    Ok(VerificationReport {
        psd_ok: min_psd_eig.iter().all(|&e| e >= -tol.tol_psd),
        min_psd_eig,
        diagonal_ok: diagonal_violation <= tol.tol_residual,
        diagonal_violation,
        offdiagonal_ok: offdiagonal_violation <= tol.tol_residual,
        offdiagonal_violation,
    })
}

/// `sum_r Delta^r o A^r` in the basis of `js`.
pub fn derivative_from_certificate(
    kernels: &[Hermitian],
    delta: &Direction,
    js: &JointSpectrum,
    tol: &Tolerances,
) -> Result<Hermitian> {
    if kernels.len() != delta.d() || kernels.iter().any(|a| a.dim() != delta.n()) {
        return Err(shape_err!("certificate and direction shapes differ"));
    }
    generator_y(js, delta, tol)?;
    let rotated = delta.in_basis(js.q());
    let mut sum = CMatrix::zeros(delta.n(), delta.n());
    for (a, dr) in kernels.iter().zip(rotated.matrices()) {
        sum = &sum + &dr.schur(a)?;
    }
    Ok(Hermitian::symmetrize(&sum))
}

/// Random PSD first-order-commuting direction at the node tuple of `sf`,
/// scaled to unit norm.
pub fn random_admissible_psd_direction<R: Rng + ?Sized>(js: &JointSpectrum, rng: &mut R) -> Result<Direction> {
    let (n, d) = (js.n(), js.d());
    let kernel = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(0.0, 0.0)
        } else {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }
    });
    let diag: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
    let dir = Direction::from_kernel(js, &kernel, &diag)?.shift_to_psd();
    let norm = dir.norm();
    Ok(if norm > 0.0 { dir.scale(1.0 / norm) } else { dir })
}

/// `true` when `dir` is PSD and first-order commuting at `sf`'s nodes.
pub fn is_admissible_psd(sf: &SampledFunction, dir: &Direction, tol: &Tolerances) -> Result<bool> {
    let fo = check_first_order(&sf.tuple(), dir)?;
    Ok(fo <= tol.tol_commute && dir.min_eigenvalue() >= -tol.tol_psd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuple::{directional_derivative, FnFunction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sample(f: &FnFunction, pts: &[Vec<f64>]) -> SampledFunction {
        SampledFunction::from_function(f, pts).unwrap()
    }

    fn one_d(f: impl Fn(f64) -> f64 + Send + Sync + 'static, df: impl Fn(f64) -> f64 + Send + Sync + 'static, xs: &[f64]) -> SampledFunction {
        let f = FnFunction::new(1, move |x| f(x[0])).with_gradient(move |x| vec![df(x[0])]);
        sample(&f, &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>())
    }

    fn product() -> FnFunction {
        FnFunction::new(2, |x| x[0] * x[1]).with_gradient(|x| vec![x[1], x[0]])
    }

    fn sqrt_product() -> FnFunction {
        FnFunction::new(2, |x| (x[0] * x[1]).sqrt())
            .with_gradient(|x| vec![0.5 * (x[1] / x[0]).sqrt(), 0.5 * (x[0] / x[1]).sqrt()])
    }

    fn seeded_nodes(seed: u64, n: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| vec![rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)]).collect()
    }

    #[test]
    fn loewner_matrix_examples() {
        let a = loewner_matrix_1d(&one_d(|x| x, |_| 1.0, &[1.0, 2.0])).unwrap();
        assert_eq!(a, Hermitian::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap());
        let a = loewner_matrix_1d(&one_d(|x| x * x, |x| 2.0 * x, &[1.0, 2.0])).unwrap();
        assert_eq!(a, Hermitian::from_real_rows(&[[2.0, 3.0], [3.0, 4.0]]).unwrap());
        assert!((a.min_eigenvalue() - (3.0 - 10f64.sqrt())).abs() < 1e-12);
        let a = loewner_matrix_1d(&one_d(|x| -1.0 / x, |x| 1.0 / (x * x), &[1.0, 2.0])).unwrap();
        assert_eq!(a, Hermitian::from_real_rows(&[[1.0, 0.5], [0.5, 0.25]]).unwrap());
        assert!(matches!(loewner_matrix_1d(&sample(&product(), &[vec![1.0, 1.0]])), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let node = Node { x: vec![1.0, 2.0], f: 0.0, grad: vec![0.0, 0.0] };
        assert_eq!(SampledFunction::new(2, vec![node.clone(), node]), Err(Error::DegenerateNodes { i: 0, j: 1 }));
    }

    #[test]
    fn affine_function_gets_all_ones() {
        let f = FnFunction::new(2, |x| x[0] + x[1]).with_gradient(|_| vec![1.0, 1.0]);
        // Coordinatewise increasing nodes make the all-ones kernels the only certificate.
        let sf = sample(&f, &[vec![0.0, 0.0], vec![1.0, 2.0], vec![3.0, 2.5]]);
        let cert = certify(&sf, &tol()).unwrap();
        let cert = cert.certificate().expect("affine functions certify");
        for a in &cert.kernels {
            assert!((a.matrix() - &CMatrix::from_fn(3, 3, |_, _| C64::new(1.0, 0.0))).max_abs() < 1e-6);
        }
        assert!(verify_certificate(&sf, &cert.kernels, &tol()).unwrap().passed());
    }

    #[test]
    fn verification_catches_perturbed_diagonal() {
        let f = FnFunction::new(2, |x| x[0] + x[1]).with_gradient(|_| vec![1.0, 1.0]);
        let sf = sample(&f, &[vec![0.0, 0.0], vec![1.0, 2.0]]);
        let ones = Hermitian::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(verify_certificate(&sf, &[ones.clone(), ones.clone()], &tol()).unwrap().passed());
        let bumped = Hermitian::from_real_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let rep = verify_certificate(&sf, &[bumped, ones], &tol()).unwrap();
        assert!(!rep.diagonal_ok && rep.psd_ok && rep.offdiagonal_ok);
    }

    #[test]
    fn one_dimensional_recovery() {
        let sf = one_d(|x| -1.0 / x, |x| 1.0 / (x * x), &[1.0, 2.0, 3.0]);
        let cert = certify(&sf, &tol()).unwrap();
        let cert = cert.certificate().expect("-1/x is operator monotone");
        assert!(cert.residuals.min_psd_eig[0] >= -1e-9);

        let sf = one_d(|x| x * x, |x| 2.0 * x, &[1.0, 2.0]);
        let res = certify(&sf, &tol()).unwrap();
        let r = res.refutation().expect("x^2 is not operator monotone");
        assert_eq!(r.status, RefutationStatus::Infeasible);
        assert!(r.witness_min_eig.unwrap() < -tol().tol_psd);
    }

    #[test]
    fn product_is_refuted() {
        let sf = sample(&product(), &[vec![1.0, 1.0], vec![2.0, 2.0]]);
        let res = certify(&sf, &tol()).unwrap();
        let r = res.refutation().expect("x y is not in the class");
        assert_eq!(r.status, RefutationStatus::Infeasible);
        let w = r.witness.as_ref().unwrap();
        assert!(is_admissible_psd(&sf, w, &tol()).unwrap());
        let m = sampled_derivative(&sf, w, &tol()).unwrap().min_eigenvalue();
        assert!((m - r.witness_min_eig.unwrap()).abs() < 1e-12 && m < -tol().tol_psd);
        assert!(r.raw_min_eig.unwrap() <= -2.9);
    }

    #[test]
    fn refutation_witness_examples() {
        let sf = sample(&product(), &[vec![1.0, 1.0], vec![2.0, 2.0]]);
        let zero = refutation_witness(&sf, &CMatrix::zeros(2, 2), &tol()).unwrap();
        assert_eq!(zero.min_eig, 0.0);
        assert_eq!(zero.direction, Direction::zeros(2, 2));

        let k = CMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        let w = refutation_witness(&sf, &k, &tol()).unwrap();
        let swap = Hermitian::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(w.direction.matrices(), &[swap.clone(), swap]);
        assert!(!w.is_psd);
        assert!((w.min_eig + 3.0).abs() < 1e-12);
        let w2 = refutation_witness(&sf, &k.scale_real(2.0), &tol()).unwrap();
        assert!((w2.min_eig + 6.0).abs() < 1e-12);

        assert!(matches!(
            refutation_witness(&sf, &CMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]), &tol()),
            Err(Error::NotSkewSymmetric { .. })
        ));
    }

    #[test]
    fn sqrt_product_certifies() {
        let sf = sample(&sqrt_product(), &seeded_nodes(11, 4));
        for method in [Method::DouglasRachford, Method::Dykstra] {
            let (cert, _) = certify_with(&sf, &tol(), method).unwrap();
            let cert = cert.certificate().expect("sqrt(xy) is in the class");
            assert!(cert.iterations <= 10_000);
            assert!(cert.residuals.max_constraint_violation <= 1e-6);
            assert!(verify_certificate(&sf, &cert.kernels, &tol()).unwrap().passed());
        }
    }

    #[test]
    fn polishing_yields_psd_kernels_meeting_the_constraints() {
        for seed in 20..26 {
            let sf = sample(&sqrt_product(), &seeded_nodes(seed, 5));
            let start = least_norm_start(&sf);
            let y = project_psd(&start);
            if let Some(a) = polish(&sf, &y, &tol()) {
                let kernels: Vec<Hermitian> = a.iter().map(Hermitian::symmetrize).collect();
                assert!(CertificateResiduals::of(&sf, &kernels).within(&tol()));
            }
        }
        let infeasible = sample(&product(), &[vec![1.0, 1.0], vec![2.0, 2.0]]);
        assert!(polish(&infeasible, &project_psd(&least_norm_start(&infeasible)), &tol()).is_none());
    }

    #[test]
    fn schur_identity_and_soundness() {
        let sf = sample(&sqrt_product(), &seeded_nodes(11, 4));
        let cert = certify(&sf, &tol()).unwrap();
        let cert = cert.certificate().unwrap();
        let js = sf.spectrum();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let dir = random_admissible_psd_direction(&js, &mut rng).unwrap();
            assert!(is_admissible_psd(&sf, &dir, &tol()).unwrap());
            let schur = derivative_from_certificate(&cert.kernels, &dir, &js, &tol()).unwrap();
            let direct = directional_derivative(&sqrt_product(), &js, &dir, &tol()).unwrap();
            assert!((schur.matrix() - direct.matrix()).frobenius_norm() <= 1e-8);
            assert!(direct.min_eigenvalue() >= -10.0 * tol().tol_psd);
        }
        let zero = derivative_from_certificate(&cert.kernels, &Direction::zeros(2, 4), &js, &tol()).unwrap();
        assert_eq!(zero, Hermitian::zeros(4));
    }

    #[test]
    fn permutation_equivariance() {
        let sf = sample(&sqrt_product(), &seeded_nodes(12, 4));
        let perm = [2, 0, 3, 1];
        let a = certify(&sf, &tol()).unwrap();
        let b = certify(&sf.permute(&perm).unwrap(), &tol()).unwrap();
        let (a, b) = (a.certificate().unwrap(), b.certificate().unwrap());
        for (ka, kb) in a.kernels.iter().zip(&b.kernels) {
            let permuted = ka.permute_symmetric(&perm);
            assert!((&permuted - kb.matrix()).max_abs() < 1e-9);
        }
    }

    #[test]
    fn one_dimensional_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let candidates: [(fn(f64) -> f64, fn(f64) -> f64); 4] = [
            (|x| x.ln(), |x| 1.0 / x),
            (|x| x.sqrt(), |x| 0.5 / x.sqrt()),
            (|x| x * x * x, |x| 3.0 * x * x),
            (|x| x.exp(), |x| x.exp()),
        ];
        for (f, df) in candidates {
            let xs: Vec<f64> = (0..4).map(|k| 0.5 + k as f64 + rng.gen_range(0.0..0.5)).collect();
            let sf = one_d(f, df, &xs);
            let l = loewner_matrix_1d(&sf).unwrap();
            let res = certify(&sf, &tol()).unwrap();
            assert_eq!(res.certificate().is_some(), l.is_psd(tol().tol_psd));
            if let Some(cert) = res.certificate() {
                assert!((cert.kernels[0].matrix() - l.matrix()).max_abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dykstra_agrees_on_small_cases() {
        let monotone = one_d(|x| -1.0 / x, |x| 1.0 / (x * x), &[1.0, 2.0, 3.0]);
        let (c, _) = certify_with(&monotone, &tol(), Method::Dykstra).unwrap();
        assert!(c.certificate().is_some());
        let sf = sample(&product(), &[vec![1.0, 1.0], vec![2.0, 2.0]]);
        let (c, trace) = certify_with(&sf, &tol(), Method::Dykstra).unwrap();
        let r = c.refutation().unwrap();
        assert_eq!(r.status, RefutationStatus::Infeasible);
        assert!(r.raw_min_eig.unwrap() <= -2.9);
        assert!((trace.gaps.last().unwrap() - r.final_distance).abs() == 0.0);
    }

    #[test]
    fn gaps_do_not_increase() {
        let sf = sample(&product(), &[vec![1.0, 1.0], vec![2.0, 2.0], vec![0.5, 3.0]]);
        let (_, trace) = certify_with(&sf, &tol(), Method::DouglasRachford).unwrap();
        let g = &trace.gaps;
        let burn = g.len() / 10;
        assert!(g.len() > 10);
        for k in burn + 1..g.len() {
            assert!(g[k] <= g[k - 1] + 1e-12, "gap rose at {k}: {} -> {}", g[k - 1], g[k]);
        }
    }
}
