use loewner_core::cert::{certify, loewner_matrix_1d, SampledFunction};
use loewner_core::linalg::{graded_sum, GradedSpace, Hermitian, Tolerances};
use loewner_core::realization::cauchy::{mu_resolvent_norm, CauchyRealization};
use loewner_core::realization::measure::{herglotz_eval, Atom, DiscreteMeasure, Support};
use loewner_core::realization::mobius::{alpha, beta, rho};
use loewner_core::tuple::{joint_diagonalize, CommutingTuple, FnFunction, JointSpectrum};
use loewner_core::{c64, CMatrix, C64};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c64(a, b))
}

fn hermitian(n: usize) -> impl Strategy<Value = Hermitian> {
    proptest::collection::vec(complex(), n * n)
        .prop_map(move |v| Hermitian::symmetrize(&CMatrix::from_vec(n, n, v).unwrap()))
}

fn unitary(n: usize) -> impl Strategy<Value = CMatrix> {
    hermitian(n).prop_map(|h| h.eig().vectors)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(h in (1usize..7).prop_flat_map(hermitian)) {
        let e = h.eig();
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = e.reconstruct();
        prop_assert!((back.matrix() - h.matrix()).frobenius_norm() <= 1e-10 * (1.0 + h.frobenius_norm()));
        let q = &e.vectors;
        let gram = &q.adjoint() * q;
        prop_assert!((&gram - &CMatrix::identity(h.dim())).max_abs() < 1e-12);
    }

    #[test]
    fn psd_projection_is_idempotent(h in (1usize..6).prop_flat_map(hermitian)) {
        let p = h.psd_projection();
        prop_assert!(p.min_eigenvalue() >= -1e-12);
        let pp = p.psd_projection();
        prop_assert!((pp.matrix() - p.matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn joint_diagonalization_recovers_planted_points(
        (q, pts) in (1usize..6).prop_flat_map(|n| (unitary(n), proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 2), n)))
    ) {
        let js = JointSpectrum::new(q, pts.clone()).unwrap();
        prop_assume!(js.min_gap() > 1e-3);
        let s = js.reconstruct();
        let found = joint_diagonalize(&s, &Tolerances::default()).unwrap();
        let mut want = pts.clone();
        let mut got = found.points().to_vec();
        let key = |p: &Vec<f64>| (p[0] * 1e6) as i64 * 10_000_000 + (p[1] * 1e3) as i64;
        want.sort_by_key(key);
        got.sort_by_key(key);
        for (a, b) in want.iter().zip(&got) {
            prop_assert!((a[0] - b[0]).abs() < 1e-8 && (a[1] - b[1]).abs() < 1e-8);
        }
        prop_assert!((found.reconstruct().get(0).matrix() - s.get(0).matrix()).max_abs() < 1e-8);
    }

    #[test]
    fn mobius_roundtrips(a in complex(), t in -3.0f64..3.0) {
        let l = a / (1.0 + a.norm());
        prop_assert!((beta(alpha(l).unwrap()).unwrap() - l).norm() < 1e-10);
        let z = c64(a.re, a.im.abs() + 0.1);
        prop_assert!((rho(-t, rho(t, z).unwrap()).unwrap() - z).norm() < 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn cauchy_realizations_are_pick(
        (x, v1) in (1usize..5).prop_flat_map(|m| (hermitian(m), proptest::collection::vec(complex(), m))),
        c in -1.0f64..1.0,
        z in proptest::collection::vec((-3.0f64..3.0, 0.05f64..3.0), 2),
    ) {
        let m = x.dim();
        let g = GradedSpace::new(vec![m.div_ceil(2), m / 2]).unwrap_or_else(|_| GradedSpace::new(vec![m]).unwrap());
        let z: Vec<C64> = z.iter().take(g.d()).map(|&(a, b)| c64(a, b)).collect();
        let cr = CauchyRealization::new(c, x.clone(), v1, g.clone()).unwrap();
        prop_assert!(cr.eval(&z).unwrap().im >= -1e-9);
        let min_im = z.iter().map(|w| w.im).fold(f64::INFINITY, f64::min);
        prop_assert!(mu_resolvent_norm(&x, &g, &z).unwrap() <= 1.0 / min_im + 1e-9);
        let conj: Vec<C64> = z.iter().map(|w| w.conj()).collect();
        prop_assert!(mu_resolvent_norm(&x, &g, &conj).unwrap() <= 1.0 / min_im + 1e-9);
    }

    #[test]
    fn herglotz_transform_has_positive_real_part(
        atoms in proptest::collection::vec((0.0f64..6.3, 0.01f64..5.0), 1..6),
        r in 0.0f64..0.999,
        theta in 0.0f64..6.3,
    ) {
        let mu = DiscreteMeasure::new(Support::Circle, atoms.iter().map(|&(location, mass)| Atom { location, mass }).collect()).unwrap();
        prop_assert!(herglotz_eval(&mu, C64::from_polar(r, theta)).unwrap().re >= -1e-12);
    }

    #[test]
    fn graded_sum_matches_kronecker_blocks(h in hermitian(2), k in hermitian(2)) {
        let g = GradedSpace::scalar(2);
        let sum = graded_sum(&[h.matrix().clone(), k.matrix().clone()], &g).unwrap();
        let p0 = g.projection(0);
        let p1 = g.projection(1);
        let expected = &h.matrix().kron(&p0) + &k.matrix().kron(&p1);
        prop_assert!((&sum - &expected).max_abs() < 1e-15);
    }
}

/// In one variable the certificate exists exactly when the divided-difference
/// matrix is positive semidefinite.
#[test]
fn one_variable_certification_tracks_loewner_matrix() {
    let tol = Tolerances::default();
    let cases: Vec<(FnFunction, Vec<f64>)> = vec![
        (FnFunction::new(1, |x| -1.0 / x[0]), vec![1.0, 2.0, 3.0]),
        (FnFunction::new(1, |x| x[0].sqrt()), vec![0.5, 1.0, 4.0, 9.0]),
        (FnFunction::new(1, |x| x[0] * x[0]), vec![1.0, 2.0]),
        (FnFunction::new(1, |x| x[0].powi(3)), vec![-1.0, 0.5, 2.0]),
        (FnFunction::new(1, |x| x[0].atan()), vec![-0.3, 0.2, 0.4]),
    ];
    for (f, xs) in cases {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let sf = SampledFunction::from_function(&f, &pts).unwrap();
        let psd = loewner_matrix_1d(&sf).unwrap().min_eigenvalue() >= -tol.tol_psd;
        let cert = certify(&sf, &tol).unwrap();
        assert_eq!(cert.certificate().is_some(), psd, "nodes {xs:?}");
        if let Some(c) = cert.certificate() {
            let l = loewner_matrix_1d(&sf).unwrap();
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    if i != j {
                        assert!((c.kernels[0][(i, j)] - l[(i, j)]).norm() < 1e-8);
                    }
                }
            }
        }
    }
}

#[test]
fn commuting_tuples_reject_noncommuting_input() {
    let a = Hermitian::from_real_rows(&[[1.0, 0.0], [0.0, 2.0]]).unwrap();
    let b = Hermitian::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
    assert!(CommutingTuple::new(vec![a, b], &Tolerances::default()).is_err());
}
