//! Cauchy-form realizations `F(z) = C + <(X - z)^{-1} v1, v1>` and their
//! lift to tuples of matrices,
//! `F(S) = C + R_v^* (I (x) X - S (.) I)^{-1} R_v` with `R_v h = h (x) v1`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::selfadjoint::SelfAdjointRealization;
use super::PickFunction;
use crate::error::{shape_err, Error, Result};
use crate::linalg::{graded_sum, min_singular_value, GradedSpace, Hermitian};
use crate::matrix::{inner, solve, CMatrix, Lu, C64};
use crate::tuple::{CommutingTuple, SmoothFunction};

/// Largest lifted system `n m` solved densely.
pub const MAX_LIFTED_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct CauchyRealization {
    pub c: f64,
    pub x: Hermitian,
    pub v1: Vec<C64>,
    pub grading: GradedSpace,
}

/// `X - z` with `z` acting blockwise.
pub fn shifted(x: &CMatrix, g: &GradedSpace, z: &[C64]) -> Result<CMatrix> {
    let zb = g.expand(z)?;
    if x.rows() != zb.len() || x.cols() != zb.len() {
        return Err(shape_err!("X is {}x{} for a grading of total {}", x.rows(), x.cols(), zb.len()));
    }
    Ok(CMatrix::from_fn(x.rows(), x.cols(), |i, j| if i == j { x[(i, j)] - zb[i] } else { x[(i, j)] }))
}

/// `||(X - z)^{-1}||_2`, infinite when `X - z` is singular to working
/// precision.
pub fn mu_resolvent_norm(x: &Hermitian, g: &GradedSpace, z: &[C64]) -> Result<f64> {
    let s = min_singular_value(&shifted(x, g, z)?);
    let floor = 4.0 * (x.dim() as f64) * f64::EPSILON * spectral_scale(x, z);
    Ok(if s > floor { 1.0 / s } else { f64::INFINITY })
}

fn spectral_scale(x: &Hermitian, z: &[C64]) -> f64 {
    1.0 + x.norm2() + z.iter().fold(0.0, |m: f64, w| m.max(w.norm()))
}

/// Whether `X - z` is singular, judged by its smallest singular value
/// relative to `1 + ||X|| + max |z^r|`.
pub fn in_mu_spectrum(x: &Hermitian, g: &GradedSpace, z: &[C64], tol: f64) -> Result<bool> {
    Ok(min_singular_value(&shifted(x, g, z)?) <= tol * spectral_scale(x, z))
}

impl CauchyRealization {
    pub fn new(c: f64, x: Hermitian, v1: Vec<C64>, grading: GradedSpace) -> Result<Self> {
        if x.dim() != grading.total() || v1.len() != grading.total() {
            return Err(shape_err!("X and v1 must match the grading"));
        }
        if !c.is_finite() {
            return Err(Error::InvalidInput("C must be finite".into()));
        }
        Ok(CauchyRealization { c, x, v1, grading })
    }

    pub fn d(&self) -> usize {
        self.grading.d()
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        let s = solve(&shifted(&self.x, &self.grading, z)?, &self.v1).map_err(|_| Error::SingularResolvent)?;
        Ok(C64::new(self.c, 0.0) + inner(&s, &self.v1))
    }

    fn lift(&self, n: usize) -> Result<CMatrix> {
        let m = self.grading.total();
        if n * m > MAX_LIFTED_DIM {
            return Err(Error::InvalidInput(alloc::format!("lifted dimension {} exceeds {MAX_LIFTED_DIM}", n * m)));
        }
        let mut r = CMatrix::zeros(n * m, n);
        for i in 0..n {
            for a in 0..m {
                r[(i * m + a, i)] = self.v1[a];
            }
        }
        Ok(r)
    }

    /// `I (x) X - S (.) I`.
    pub fn lifted_operator(&self, s: &[Hermitian]) -> Result<CMatrix> {
        let n = s.first().map(|m| m.dim()).ok_or_else(|| shape_err!("empty tuple"))?;
        let mats: Vec<CMatrix> = s.iter().map(|m| m.matrix().clone()).collect();
        let sum = graded_sum(&mats, &self.grading)?;
        Ok(&CMatrix::identity(n).kron(self.x.matrix()) - &sum)
    }

    /// `Y^{-1} R_v` for `Y` the lifted operator at `s`.
    fn resolvent_lift(&self, s: &[Hermitian]) -> Result<CMatrix> {
        let n = s.first().map(|m| m.dim()).ok_or_else(|| shape_err!("empty tuple"))?;
        let r = self.lift(n)?;
        let y = self.lifted_operator(s)?;
        let lu = Lu::factor(&y).map_err(|_| Error::SingularLiftedResolvent)?;
        Ok(lu.solve_mat(&r))
    }

    /// `C + R_v^* Y^{-1} R_v`; `s` need not commute.
    pub fn eval_lifted(&self, s: &[Hermitian]) -> Result<Hermitian> {
        let n = s.first().map(|m| m.dim()).ok_or_else(|| shape_err!("empty tuple"))?;
        let r = self.lift(n)?;
        let core = &r.adjoint() * &self.resolvent_lift(s)?;
        Ok(Hermitian::symmetrize(&(&core + &CMatrix::identity(n).scale_real(self.c))))
    }

    pub fn eval_on_tuple(&self, s: &CommutingTuple) -> Result<Hermitian> {
        self.eval_lifted(s.matrices())
    }

    /// `d/dt F(R(t))` along `R(t) = (1 - t) S + t T`:
    /// `R_v^* Y(t)^{-1} (Delta (.) I) Y(t)^{-1} R_v` with `Delta = T - S`.
    pub fn path_derivative(&self, s: &CommutingTuple, t_end: &CommutingTuple, t: f64) -> Result<Hermitian> {
        if s.d() != t_end.d() || s.n() != t_end.n() {
            return Err(shape_err!("endpoint tuples have different shapes"));
        }
        let r: Vec<Hermitian> = s
            .matrices()
            .iter()
            .zip(t_end.matrices())
            .map(|(a, b)| Hermitian::symmetrize(&(&a.scale_real(1.0 - t) + &b.scale_real(t))))
            .collect();
        let delta: Vec<CMatrix> = s.matrices().iter().zip(t_end.matrices()).map(|(a, b)| b.matrix() - a.matrix()).collect();
        let w = self.resolvent_lift(&r)?;
        let middle = graded_sum(&delta, &self.grading)?;
        Ok(Hermitian::symmetrize(&(&w.adjoint() * &(&middle * &w))))
    }

    /// Composite Simpson quadrature of the path derivative, compared with
    /// the endpoint difference and with a run at twice the panels.
    pub fn path_integral(&self, s: &CommutingTuple, t_end: &CommutingTuple, panels: usize) -> Result<PathIntegral> {
        if panels == 0 {
            return Err(Error::InvalidInput("need at least one panel".into()));
        }
        let coarse = self.simpson(s, t_end, panels)?;
        let fine = self.simpson(s, t_end, 2 * panels)?;
        let direct = self.eval_on_tuple(t_end)?.matrix() - self.eval_on_tuple(s)?.matrix();
        Ok(PathIntegral {
            error: (&coarse.0 - &direct).frobenius_norm(),
            fine_error: (&fine.0 - &direct).frobenius_norm(),
            richardson_estimate: (&fine.0 - &coarse.0).frobenius_norm() / 15.0,
            min_derivative_eig: coarse.1,
            integral: Hermitian::symmetrize(&coarse.0),
            direct: Hermitian::symmetrize(&direct),
        })
    }

    fn simpson(&self, s: &CommutingTuple, t_end: &CommutingTuple, panels: usize) -> Result<(CMatrix, f64)> {
        let n = s.n();
        let h = 1.0 / panels as f64;
        let mut acc = CMatrix::zeros(n, n);
        let mut min_eig = f64::INFINITY;
        let mut prev = self.path_derivative(s, t_end, 0.0)?;
        min_eig = min_eig.min(prev.min_eigenvalue());
        for k in 0..panels {
            let a = k as f64 * h;
            let mid = self.path_derivative(s, t_end, a + 0.5 * h)?;
            let next = self.path_derivative(s, t_end, a + h)?;
            min_eig = min_eig.min(mid.min_eigenvalue()).min(next.min_eigenvalue());
            let panel = &(&prev.matrix().clone() + &mid.scale_real(4.0)) + next.matrix();
            acc = &acc + &panel.scale_real(h / 6.0);
            prev = next;
        }
        Ok((acc, min_eig))
    }

    /// `dF/dx^r` at a real point: `<(X - x)^{-1} P^r (X - x)^{-1} v1, v1>`.
    pub fn real_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        let a = shifted(&self.x, &self.grading, &z)?;
        let lu = Lu::factor(&a).map_err(|_| Error::SingularResolvent)?;
        let s = lu.solve_vec(&self.v1);
        let labels = self.grading.labels();
        Ok((0..self.d())
            .map(|r| {
                let masked: Vec<C64> = s.iter().zip(&labels).map(|(v, &l)| if l == r { *v } else { C64::new(0.0, 0.0) }).collect();
                inner(&lu.solve_vec(&masked), &self.v1).re
            })
            .collect())
    }
}

impl PickFunction for CauchyRealization {
    fn dim(&self) -> usize {
        self.d()
    }

    fn eval(&self, z: &[C64]) -> Result<C64> {
        CauchyRealization::eval(self, z)
    }
}

/// Restriction to real points off the mu-spectrum.
impl SmoothFunction for CauchyRealization {
    fn dim(&self) -> usize {
        self.d()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let z: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        CauchyRealization::eval(self, &z).map(|w| w.re).unwrap_or(f64::NAN)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.real_gradient(x).ok()
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        let z: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        in_mu_spectrum(&self.x, &self.grading, &z, 1e-9).map(|hit| !hit).unwrap_or(false)
    }
}

/// Simpson quadrature of the path derivative against `F(T) - F(S)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathIntegral {
    pub integral: Hermitian,
    pub direct: Hermitian,
    /// `||integral - direct||_F`.
    pub error: f64,
    /// The same error with twice the panels; about `error / 16`.
    pub fine_error: f64,
    /// `||I_{2N} - I_N||_F / 15`.
    pub richardson_estimate: f64,
    /// Smallest eigenvalue of the integrand over the quadrature nodes.
    pub min_derivative_eig: f64,
}

/// `v1 = (X - z0) v` and `C = c + <z0 v, v> - <v, v1>`.
pub fn reduce_to_cauchy(sr: &SelfAdjointRealization, tol: f64) -> Result<CauchyRealization> {
    let a = shifted(sr.x.matrix(), &sr.grading, &sr.z0)?;
    let v1 = a.mul_vec(&sr.v);
    let z0b = sr.grading.expand(&sr.z0)?;
    let z0v: Vec<C64> = sr.v.iter().zip(&z0b).map(|(v, z)| z * v).collect();
    let c = C64::new(sr.c, 0.0) + inner(&z0v, &sr.v) - inner(&sr.v, &v1);
    if c.im.abs() > tol * (1.0 + c.norm()) {
        return Err(Error::RealityViolation { imag: c.im });
    }
    CauchyRealization::new(c.re, sr.x.clone(), v1, sr.grading.clone())
}

/// Affine change of variables mapping a box onto `(-1, 1)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxRescaling {
    /// `C^{-1/2} (X - M) C^{-1/2}`.
    pub y: Hermitian,
    pub midpoints: Vec<f64>,
    pub half_widths: Vec<f64>,
}

impl BoxRescaling {
    /// `(z^r - m^r) / c^r`.
    pub fn map_point(&self, z: &[C64]) -> Vec<C64> {
        z.iter().zip(self.midpoints.iter().zip(&self.half_widths)).map(|(w, (m, c))| (w - m) / c).collect()
    }

    /// `T^r = (S^r - m^r) / c^r`.
    pub fn map_tuple(&self, s: &CommutingTuple) -> Result<CommutingTuple> {
        let mats = s
            .matrices()
            .iter()
            .enumerate()
            .map(|(r, m)| {
                let n = m.dim();
                let shifted = m.matrix() - &CMatrix::identity(n).scale_real(self.midpoints[r]);
                Hermitian::symmetrize(&shifted.scale_real(1.0 / self.half_widths[r]))
            })
            .collect();
        CommutingTuple::new_unchecked(mats)
    }
}

pub fn rescale_to_box(x: &Hermitian, g: &GradedSpace, bounds: &[(f64, f64)]) -> Result<BoxRescaling> {
    if bounds.len() != g.d() {
        return Err(shape_err!("box has {} intervals for {} blocks", bounds.len(), g.d()));
    }
    if x.dim() != g.total() {
        return Err(shape_err!("X does not match the grading"));
    }
    if let Some(r) = bounds.iter().position(|&(a, b)| !(a.is_finite() && b.is_finite() && b > a)) {
        return Err(Error::DegenerateBox { r });
    }
    let midpoints: Vec<f64> = bounds.iter().map(|&(a, b)| 0.5 * (a + b)).collect();
    let half_widths: Vec<f64> = bounds.iter().map(|&(a, b)| 0.5 * (b - a)).collect();
    let labels = g.labels();
    let scale: Vec<f64> = labels.iter().map(|&r| 1.0 / half_widths[r].sqrt()).collect();
    let m = g.total();
    let y = CMatrix::from_fn(m, m, |i, j| {
        let centered = if i == j { x[(i, j)] - midpoints[labels[i]] } else { x[(i, j)] };
        centered * (scale[i] * scale[j])
    });
    Ok(BoxRescaling { y: Hermitian::symmetrize(&y), midpoints, half_widths })
}

/// Smallest distance of `|Im z^r|` over coordinates.
pub fn min_abs_imag(z: &[C64]) -> f64 {
    z.iter().map(|w| w.im.abs()).fold(f64::INFINITY, f64::min)
}

/// Resolvent bound `||(X - z)^{-1}|| <= 1 / min_r |Im z^r|` off the real torus.
pub fn resolvent_bound_holds(x: &Hermitian, g: &GradedSpace, z: &[C64], tol: f64) -> Result<bool> {
    Ok(mu_resolvent_norm(x, g, z)? <= 1.0 / min_abs_imag(z) + tol)
}
