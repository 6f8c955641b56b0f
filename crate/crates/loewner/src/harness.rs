//! Randomized and targeted checks of matrix monotonicity.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, index)`, so
//! trials run in parallel and the merged report does not depend on the
//! schedule.

use std::f64::consts::PI;
use std::sync::Arc;

use loewner_core::cert::random_admissible_psd_direction;
use loewner_core::linalg::{loewner_leq, Hermitian, Tolerances};
use loewner_core::realization::cauchy::CauchyRealization;
use loewner_core::tuple::{apply_function, directional_derivative, CommutingTuple, JointSpectrum, SmoothFunction};
use loewner_core::{c64, CMatrix, C64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Axis-aligned box `prod_r (a_r, b_r)`.
pub type Bounds = Vec<(f64, f64)>;

const ORDER_ATTEMPTS: usize = 100;
const MAX_FAILURE_EXAMPLES: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] loewner_core::Error),
    #[error("no ordered pair stayed inside the box after {0} attempts")]
    RetryExhausted(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Stream `index` of the generator seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn validate_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    if bounds.is_empty() {
        return Err(HarnessError::Config("empty box".into()));
    }
    match bounds.iter().position(|&(a, b)| !(a.is_finite() && b.is_finite() && b > a)) {
        Some(r) => Err(HarnessError::Config(format!("interval {r} of the box is degenerate"))),
        None => Ok(()),
    }
}

/// Haar unitary: QR of a complex Gaussian matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        for q in &cols {
            let p: C64 = v.iter().zip(q).map(|(a, b)| a * b.conj()).sum();
            for (a, b) in v.iter_mut().zip(q) {
                *a -= p * b;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            // Modified Gram-Schmidt leaves a positive diagonal in R already.
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Planted joint spectrum: i.i.d. uniform points in the box, resampled
/// until the minimum gap exceeds `1e-6` times the smallest box width.
pub fn random_spectrum<R: Rng + ?Sized>(n: usize, bounds: &[(f64, f64)], rng: &mut R) -> Result<JointSpectrum> {
    validate_bounds(bounds)?;
    let width = bounds.iter().map(|&(a, b)| b - a).fold(f64::INFINITY, f64::min);
    let q = random_unitary(n, rng);
    loop {
        let points: Vec<Vec<f64>> = (0..n).map(|_| bounds.iter().map(|&(a, b)| rng.gen_range(a..b)).collect()).collect();
        let js = JointSpectrum::new(q.clone(), points)?;
        if js.min_gap() >= 1e-6 * width {
            return Ok(js);
        }
    }
}

/// `U diag(x) U^*` with Haar `U` and uniform joint eigenvalues in the box.
pub fn random_commuting_tuple<R: Rng + ?Sized>(n: usize, bounds: &[(f64, f64)], rng: &mut R) -> Result<CommutingTuple> {
    Ok(random_spectrum(n, bounds, rng)?.reconstruct())
}

/// Commuting tuples `S <= T` with spectra inside the box.
///
/// `S = A` and `T^r = B^r + c_r I` for independent commuting tuples `A`, `B`,
/// with `c_r = max(0, lambda_max(A^r - B^r)) + margin`; both tuples are then
/// mapped by the same increasing affine map per coordinate into the box.
pub fn random_ordered_pair<R: Rng + ?Sized>(
    n: usize,
    bounds: &[(f64, f64)],
    rng: &mut R,
) -> Result<(CommutingTuple, CommutingTuple)> {
    validate_bounds(bounds)?;
    let inner: Bounds = bounds.iter().map(|&(a, b)| (a + 1e-3 * (b - a), b - 1e-3 * (b - a))).collect();
    for _ in 0..ORDER_ATTEMPTS {
        let a = random_commuting_tuple(n, bounds, rng)?;
        let b = random_commuting_tuple(n, bounds, rng)?;
        let mut s_mats = Vec::with_capacity(bounds.len());
        let mut t_mats = Vec::with_capacity(bounds.len());
        for (r, &(lo_box, hi_box)) in inner.iter().enumerate() {
            let (ar, br) = (a.get(r), b.get(r));
            let gap = Hermitian::symmetrize(&(ar.matrix() - br.matrix())).max_eigenvalue();
            let margin = rng.gen_range(0.0..0.05) * (hi_box - lo_box);
            let tr = shift(br, gap.max(0.0) + margin);
            let lo = ar.min_eigenvalue().min(tr.min_eigenvalue());
            let hi = ar.max_eigenvalue().max(tr.max_eigenvalue());
            let scale = if hi - lo > hi_box - lo_box { (hi_box - lo_box) / (hi - lo) } else { 1.0 };
            let offset = if scale < 1.0 {
                lo_box - scale * lo
            } else {
                (lo_box - lo).max(0.0) - (hi - hi_box).max(0.0)
            };
            s_mats.push(affine(ar, scale, offset));
            t_mats.push(affine(&tr, scale, offset));
        }
        let inside = |m: &[Hermitian]| {
            m.iter().zip(bounds).all(|(h, &(lo, hi))| h.min_eigenvalue() > lo && h.max_eigenvalue() < hi)
        };
        if inside(&s_mats) && inside(&t_mats) && loewner_leq(&s_mats, &t_mats, 0.0)? {
            return Ok((CommutingTuple::new_unchecked(s_mats)?, CommutingTuple::new_unchecked(t_mats)?));
        }
    }
    Err(HarnessError::RetryExhausted(ORDER_ATTEMPTS))
}

fn shift(h: &Hermitian, c: f64) -> Hermitian {
    affine(h, 1.0, c)
}

fn affine(h: &Hermitian, scale: f64, offset: f64) -> Hermitian {
    let n = h.dim();
    Hermitian::symmetrize(&(&h.scale_real(scale) + &CMatrix::identity(n).scale_real(offset)))
}

/// A function that can be applied to commuting tuples.
#[derive(Clone)]
pub enum TupleFunction {
    /// Evaluated through the lifted resolvent.
    Cauchy(CauchyRealization),
    /// Evaluated through the spectral calculus.
    Smooth(Arc<dyn SmoothFunction + Send + Sync>),
}

impl TupleFunction {
    pub fn dim(&self) -> usize {
        match self {
            TupleFunction::Cauchy(c) => c.d(),
            TupleFunction::Smooth(f) => f.dim(),
        }
    }

    pub fn eval(&self, s: &CommutingTuple, tol: &Tolerances) -> Result<Hermitian> {
        Ok(match self {
            TupleFunction::Cauchy(c) => c.eval_on_tuple(s)?,
            TupleFunction::Smooth(f) => apply_function(f.as_ref(), s, tol)?,
        })
    }

    fn smooth(&self) -> &(dyn SmoothFunction + Send + Sync) {
        match self {
            TupleFunction::Cauchy(c) => c,
            TupleFunction::Smooth(f) => f.as_ref(),
        }
    }
}

impl std::fmt::Debug for TupleFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TupleFunction::Cauchy(c) => f.debug_tuple("Cauchy").field(c).finish(),
            TupleFunction::Smooth(_) => f.write_str("Smooth(..)"),
        }
    }
}

/// Smallest eigenvalue of `f(T) - f(S)`.
pub fn global_trial(f: &TupleFunction, s: &CommutingTuple, t: &CommutingTuple, tol: &Tolerances) -> Result<f64> {
    let diff = f.eval(t, tol)?.matrix() - f.eval(s, tol)?.matrix();
    Ok(Hermitian::symmetrize(&diff).min_eigenvalue())
}

/// Smallest eigenvalue of `D_Delta f(S)`.
pub fn local_trial<F: SmoothFunction + ?Sized>(
    f: &F,
    js: &JointSpectrum,
    delta: &loewner_core::tuple::Direction,
    tol: &Tolerances,
) -> Result<f64> {
    Ok(directional_derivative(f, js, delta, tol)?.min_eigenvalue())
}

/// `(P^1 P^2)^s` for a commuting pair with positive spectrum; `s = 0` gives
/// the identity exactly.
pub fn geomean_power(p: &CommutingTuple, s: f64) -> Result<Hermitian> {
    if p.d() != 2 {
        return Err(loewner_core::Error::DimensionMismatch(format!("geometric mean needs a pair, got {}", p.d())).into());
    }
    for (r, m) in p.matrices().iter().enumerate() {
        if m.min_eigenvalue() <= 0.0 {
            return Err(loewner_core::Error::DomainViolation { index: r }.into());
        }
    }
    if s == 0.0 {
        return Ok(Hermitian::identity(p.n()));
    }
    let prod = Hermitian::symmetrize(&(p.get(0).matrix() * p.get(1).matrix()));
    Ok(prod.apply(|x| x.max(0.0).powf(s)))
}

/// Smallest eigenvalue of `(B^1 B^2)^s - (A^1 A^2)^s`.
pub fn geomean_trial(s: f64, a: &CommutingTuple, b: &CommutingTuple) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(HarnessError::Config(format!("exponent {s} outside [0, 1]")));
    }
    let diff = geomean_power(b, s)?.matrix() - geomean_power(a, s)?.matrix();
    Ok(Hermitian::symmetrize(&diff).min_eigenvalue())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathTrial {
    pub integral_error: f64,
    pub min_derivative_eig: f64,
    /// Quadrature error at `panels` over the error at `2 panels`.
    pub richardson_ratio: f64,
}

/// Simpson integral of the path derivative against `F(T) - F(S)`.
pub fn path_positivity_trial(cr: &CauchyRealization, s: &CommutingTuple, t: &CommutingTuple, panels: usize) -> Result<PathTrial> {
    let pi = cr.path_integral(s, t, panels)?;
    let richardson_ratio = if pi.fine_error > 0.0 { pi.error / pi.fine_error } else { f64::NAN };
    Ok(PathTrial { integral_error: pi.error, min_derivative_eig: pi.min_derivative_eig, richardson_ratio })
}

/// The two commuting pairs of the intermediate-point example.
pub fn exi1_pair() -> (CommutingTuple, CommutingTuple) {
    let h = |rows: [[f64; 2]; 2]| Hermitian::from_real_rows(&rows).expect("symmetric literal");
    let s = vec![h([[0.0, 0.0], [0.0, 5.0]]), h([[1.0, 0.0], [0.0, 0.0]])];
    let t = vec![h([[4.0, 2.0], [2.0, 6.0]]), h([[2.0, 2.0], [2.0, 4.0]])];
    (
        CommutingTuple::new_unchecked(s).expect("square literals"),
        CommutingTuple::new_unchecked(t).expect("square literals"),
    )
}

/// Outcome of [`intermediate_search`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntermediateResult {
    /// A commuting `R` with `S <= R <= T` (within `1e-8`) at distance
    /// above `1e-4` from both endpoints was seen.
    pub found: bool,
    /// The feasible candidate farthest from the endpoints.
    pub best_candidate: Vec<Hermitian>,
    /// `min(d(R, S), d(R, T))` for `best_candidate`.
    pub distance_from_endpoints: f64,
    /// Smallest order violation among candidates far from both endpoints.
    pub min_far_penalty: f64,
    pub evaluations: usize,
}

pub const FEASIBILITY_TOL: f64 = 1e-8;
pub const ENDPOINT_DISTANCE: f64 = 1e-4;

/// Commuting 2x2 pair `R^r = U diag(p_r) U^*` with
/// `U = [[cos a, -e^{i b} sin a], [e^{-i b} sin a, cos a]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct PairParams([f64; 6]);

impl PairParams {
    fn matrices(&self) -> [[C64; 3]; 2] {
        let [a, b, p11, p12, p21, p22] = self.0;
        let (c, s) = (a.cos(), a.sin());
        let e = C64::from_polar(1.0, -b);
        // u1 = (c, e s), u2 = (-conj(e) s, c); store (m00, m01, m11).
        let build = |l1: f64, l2: f64| {
            let m00 = l1 * c * c + l2 * s * s;
            let m11 = l1 * s * s + l2 * c * c;
            let m01 = (e.conj() * (l1 - l2)) * (c * s);
            [c64(m00, 0.0), m01, c64(m11, 0.0)]
        };
        [build(p11, p12), build(p21, p22)]
    }
}

fn min_eig2(m: [C64; 3]) -> f64 {
    let (a, d) = (m[0].re, m[2].re);
    0.5 * (a + d) - ((0.5 * (a - d)).powi(2) + m[1].norm_sqr()).sqrt()
}

fn packed(h: &Hermitian) -> [C64; 3] {
    [h[(0, 0)], h[(0, 1)], h[(1, 1)]]
}

fn diff2(x: [C64; 3], y: [C64; 3]) -> [C64; 3] {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

fn frob2(m: [C64; 3]) -> f64 {
    (m[0].norm_sqr() + 2.0 * m[1].norm_sqr() + m[2].norm_sqr()).sqrt()
}

struct Exi1Problem {
    s: [[C64; 3]; 2],
    t: [[C64; 3]; 2],
}

impl Exi1Problem {
    /// Order violation and `min(d(R, S), d(R, T))` with `d` the largest
    /// Frobenius distance over coordinates.
    fn score(&self, p: &PairParams) -> (f64, f64) {
        let r = p.matrices();
        let mut penalty = 0.0;
        let (mut ds, mut dt): (f64, f64) = (0.0, 0.0);
        for k in 0..2 {
            penalty += (-min_eig2(diff2(r[k], self.s[k]))).max(0.0);
            penalty += (-min_eig2(diff2(self.t[k], r[k]))).max(0.0);
            ds = ds.max(frob2(diff2(r[k], self.s[k])));
            dt = dt.max(frob2(diff2(r[k], self.t[k])));
        }
        (penalty, ds.min(dt))
    }
}

/// Simulated annealing over commuting 2x2 pairs between `S` and `T`.
///
/// The energy is `penalty - min(dist, 1) / 100`: feasible points far from
/// the endpoints score below every infeasible or endpoint-hugging point.
/// The budget is split over restarts; each restart ends with a greedy
/// refinement at small step sizes.
pub fn intermediate_search<R: Rng + ?Sized>(
    s: &CommutingTuple,
    t: &CommutingTuple,
    budget: usize,
    rng: &mut R,
) -> Result<IntermediateResult> {
    if s.n() != 2 || s.d() != 2 || t.n() != 2 || t.d() != 2 {
        return Err(HarnessError::Config("intermediate search works on pairs of 2x2 matrices".into()));
    }
    let prob = Exi1Problem {
        s: [packed(s.get(0)), packed(s.get(1))],
        t: [packed(t.get(0)), packed(t.get(1))],
    };
    let ranges: Vec<(f64, f64)> = (0..2)
        .map(|r| {
            let lo = s.get(r).min_eigenvalue().min(t.get(r).min_eigenvalue());
            let hi = s.get(r).max_eigenvalue().max(t.get(r).max_eigenvalue());
            (lo, hi)
        })
        .collect();
    let energy = |sc: (f64, f64)| sc.0 - sc.1.min(1.0) / 100.0;

    let mut best = IntermediateResult {
        found: false,
        best_candidate: vec![s.get(0).clone(), s.get(1).clone()],
        distance_from_endpoints: 0.0,
        min_far_penalty: f64::INFINITY,
        evaluations: 0,
    };
    let record = |p: &PairParams, sc: (f64, f64), best: &mut IntermediateResult| {
        best.evaluations += 1;
        if sc.0 <= FEASIBILITY_TOL && sc.1 > best.distance_from_endpoints {
            best.distance_from_endpoints = sc.1;
            best.best_candidate = p.matrices().iter().map(unpack).collect();
        }
        if sc.1 > ENDPOINT_DISTANCE {
            best.min_far_penalty = best.min_far_penalty.min(sc.0);
            if sc.0 <= FEASIBILITY_TOL {
                best.found = true;
            }
        }
    };

    let restarts = (budget / 5000).clamp(1, 20);
    let per_restart = budget / restarts;
    let scales = [PI, 2.0 * PI, ranges[0].1 - ranges[0].0, ranges[0].1 - ranges[0].0, ranges[1].1 - ranges[1].0, ranges[1].1 - ranges[1].0];
    let mut remaining = budget;
    for restart in 0..restarts {
        let steps = if restart + 1 == restarts { remaining } else { per_restart };
        remaining -= steps;
        if steps == 0 {
            continue;
        }
        let mut cur = PairParams([
            rng.gen_range(0.0..PI),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(ranges[0].0..=ranges[0].1),
            rng.gen_range(ranges[0].0..=ranges[0].1),
            rng.gen_range(ranges[1].0..=ranges[1].1),
            rng.gen_range(ranges[1].0..=ranges[1].1),
        ]);
        let mut cur_sc = prob.score(&cur);
        record(&cur, cur_sc, &mut best);
        let anneal = steps * 4 / 5;
        for k in 1..steps {
            let frac = k as f64 / steps as f64;
            let (step, temp) = if k < anneal {
                (0.3 * (1e-4f64).powf(frac), 1e-1 * (1e-7f64).powf(frac))
            } else {
                (1e-4 * (1e-3f64).powf(frac), 0.0)
            };
            let mut next = cur;
            let i = rng.gen_range(0..6);
            let z: f64 = rng.sample(StandardNormal);
            next.0[i] += z * step * scales[i];
            let sc = prob.score(&next);
            record(&next, sc, &mut best);
            let delta = energy(sc) - energy(cur_sc);
            if delta <= 0.0 || (temp > 0.0 && rng.gen::<f64>() < (-delta / temp).exp()) {
                cur = next;
                cur_sc = sc;
            }
        }
    }
    Ok(best)
}

fn unpack(m: &[C64; 3]) -> Hermitian {
    Hermitian::symmetrize(&CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => m[0],
        (0, 1) => m[1],
        (1, 0) => m[1].conj(),
        _ => m[2],
    }))
}

/// Order check on the non-commuting midpoint `(S + T) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxedCheck {
    pub order_holds: bool,
    pub distance_from_endpoints: f64,
    pub commutator_norm: f64,
}

/// Dropping commutativity, `(S + T) / 2` lies between the endpoints.
pub fn relaxed_midpoint_check(s: &CommutingTuple, t: &CommutingTuple) -> Result<RelaxedCheck> {
    let mid: Vec<Hermitian> = s
        .matrices()
        .iter()
        .zip(t.matrices())
        .map(|(a, b)| Hermitian::symmetrize(&(a.matrix() + b.matrix()).scale_real(0.5)))
        .collect();
    let order_holds = loewner_leq(s.matrices(), &mid, FEASIBILITY_TOL)? && loewner_leq(&mid, t.matrices(), FEASIBILITY_TOL)?;
    let dist = |x: &[Hermitian], y: &[Hermitian]| x.iter().zip(y).map(|(a, b)| (a.matrix() - b.matrix()).frobenius_norm()).fold(0.0, f64::max);
    let commutator_norm = if mid.len() >= 2 { mid[0].commutator(&mid[1]).frobenius_norm() } else { 0.0 };
    Ok(RelaxedCheck {
        order_holds,
        distance_from_endpoints: dist(&mid, s.matrices()).min(dist(&mid, t.matrices())),
        commutator_norm,
    })
}

/// Which check a fuzz run performs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Global,
    Local,
    Geomean { s: f64 },
    Path,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Global => "global",
            Mode::Local => "local",
            Mode::Geomean { .. } => "geomean",
            Mode::Path => "path",
        }
    }

    /// Whether a negative outcome contradicts a proven statement.
    pub fn asserted(&self) -> bool {
        match self {
            Mode::Geomean { s } => *s <= 0.5,
            _ => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    /// Inclusive range of matrix sizes; each trial draws its own.
    pub n_range: (usize, usize),
    pub bounds: Bounds,
    pub mode: Mode,
    pub panels: usize,
    /// Largest tolerated negative eigenvalue.
    pub violation_tol: f64,
    /// Largest tolerated quadrature error in path mode.
    pub integral_tol: f64,
    pub tol: Tolerances,
}

impl TrialConfig {
    pub fn new(mode: Mode, seed: u64, trials: usize, bounds: Bounds) -> Self {
        TrialConfig {
            seed,
            trials,
            n_range: (2, 4),
            bounds,
            mode,
            panels: 64,
            violation_tol: 1e-8,
            integral_tol: 1e-6,
            tol: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_bounds(&self.bounds)?;
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be positive".into()));
        }
        if self.n_range.0 == 0 || self.n_range.0 > self.n_range.1 {
            return Err(HarnessError::Config("invalid size range".into()));
        }
        if self.panels == 0 {
            return Err(HarnessError::Config("panels must be positive".into()));
        }
        self.tol.validate()?;
        Ok(())
    }
}

/// The inputs and outcome of a failed trial.
#[derive(Clone, Debug, PartialEq)]
pub struct FailureExample {
    pub index: usize,
    pub s: Vec<Hermitian>,
    pub t: Vec<Hermitian>,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub mode: Mode,
    pub seed: u64,
    pub trials: usize,
    pub passes: usize,
    pub failures: usize,
    /// Most negative eigenvalue seen (the minimum over trials).
    pub worst_violation: f64,
    /// Largest quadrature error, path mode only.
    pub worst_integral_error: Option<f64>,
    pub failure_examples: Vec<FailureExample>,
}

impl TrialReport {
    pub fn all_passed(&self) -> bool {
        self.failures == 0
    }
}

struct Outcome {
    value: Option<f64>,
    integral_error: Option<f64>,
    pass: bool,
    example: Option<FailureExample>,
}

/// Runs `config.trials` independent trials of `f` (ignored in geomean mode).
pub fn run_trials(config: &TrialConfig, f: Option<&TupleFunction>) -> Result<TrialReport> {
    config.validate()?;
    let f = match (config.mode, f) {
        (Mode::Geomean { .. }, _) => None,
        (_, Some(f)) => Some(f),
        (_, None) => return Err(HarnessError::Config(format!("mode {} needs a function", config.mode.name()))),
    };
    let d = match config.mode {
        Mode::Geomean { .. } => 2,
        _ => f.map(|f| f.dim()).unwrap_or(0),
    };
    if config.bounds.len() != d {
        return Err(HarnessError::Config(format!("box has {} intervals for {} variables", config.bounds.len(), d)));
    }
    if let (Mode::Path, Some(TupleFunction::Smooth(_))) = (config.mode, f) {
        return Err(HarnessError::Config("path mode needs a Cauchy realization".into()));
    }
    let outcomes: Vec<Outcome> = (0..config.trials).into_par_iter().map(|index| run_one(config, f, index)).collect();
    let mut report = TrialReport {
        mode: config.mode,
        seed: config.seed,
        trials: config.trials,
        passes: 0,
        failures: 0,
        worst_violation: f64::INFINITY,
        worst_integral_error: matches!(config.mode, Mode::Path).then_some(0.0),
        failure_examples: Vec::new(),
    };
    for o in outcomes {
        if o.pass {
            report.passes += 1;
        } else {
            report.failures += 1;
        }
        if let Some(v) = o.value {
            report.worst_violation = report.worst_violation.min(v);
        }
        if let (Some(e), Some(w)) = (o.integral_error, report.worst_integral_error.as_mut()) {
            *w = w.max(e);
        }
        if let Some(ex) = o.example {
            if report.failure_examples.len() < MAX_FAILURE_EXAMPLES {
                report.failure_examples.push(ex);
            }
        }
    }
    Ok(report)
}

fn run_one(config: &TrialConfig, f: Option<&TupleFunction>, index: usize) -> Outcome {
    let mut rng = trial_rng(config.seed, index as u64);
    let n = rng.gen_range(config.n_range.0..=config.n_range.1);
    let mut pair: Option<(CommutingTuple, CommutingTuple)> = None;
    let result: Result<(f64, Option<f64>)> = (|| match (config.mode, f) {
        (Mode::Geomean { s }, _) => {
            let (a, b) = random_ordered_pair(n, &config.bounds, &mut rng)?;
            let v = geomean_trial(s, &a, &b);
            pair = Some((a, b));
            Ok((v?, None))
        }
        (Mode::Global, Some(f)) => {
            let (a, b) = random_ordered_pair(n, &config.bounds, &mut rng)?;
            let v = global_trial(f, &a, &b, &config.tol);
            pair = Some((a, b));
            Ok((v?, None))
        }
        (Mode::Path, Some(TupleFunction::Cauchy(cr))) => {
            let (a, b) = random_ordered_pair(n, &config.bounds, &mut rng)?;
            let pt = path_positivity_trial(cr, &a, &b, config.panels);
            pair = Some((a, b));
            let pt = pt?;
            Ok((pt.min_derivative_eig, Some(pt.integral_error)))
        }
        (Mode::Local, Some(f)) => {
            let js = random_spectrum(n, &config.bounds, &mut rng)?;
            let delta = random_admissible_psd_direction(&js, &mut rng)?;
            let s = js.reconstruct();
            let v = local_trial(f.smooth(), &js, &delta, &config.tol);
            let t = CommutingTuple::new_unchecked(delta.matrices().to_vec())?;
            pair = Some((s, t));
            Ok((v?, None))
        }
        _ => Err(HarnessError::Config("mode and function do not match".into())),
    })();
    let (value, integral_error, error) = match result {
        Ok((v, e)) => (Some(v), e, None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let pass = error.is_none()
        && value.is_some_and(|v| v >= -config.violation_tol)
        && integral_error.is_none_or(|e| e <= config.integral_tol);
    let example = (!pass).then(|| {
        let (s, t) = pair.map(|(s, t)| (s.into_matrices(), t.into_matrices())).unwrap_or_default();
        FailureExample { index, s, t, value, error }
    });
    Outcome { value, integral_error, pass, example }
}
