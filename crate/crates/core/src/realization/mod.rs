//! Pick functions on the polydisk and the polyhalfplane given by explicit
//! realizations, and the conversions between them.

pub mod cauchy;
pub mod measure;
pub mod mobius;
pub mod selfadjoint;
pub mod transfer;

use crate::error::Result;
use crate::matrix::C64;

/// A holomorphic function of `d` variables given by a realization.
pub trait PickFunction {
    fn dim(&self) -> usize;
    fn eval(&self, z: &[C64]) -> Result<C64>;
}

/// `F_t = rho_t o F o rho_t`, with `rho_t` applied in every coordinate.
#[derive(Clone, Debug)]
pub struct RhoConjugate<F> {
    pub inner: F,
    pub t: f64,
}

pub fn conjugate_rho<F: PickFunction>(inner: F, t: f64) -> RhoConjugate<F> {
    RhoConjugate { inner, t }
}

impl<F: PickFunction> PickFunction for RhoConjugate<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, z: &[C64]) -> Result<C64> {
        mobius::rho(self.t, self.inner.eval(&mobius::rho_point(self.t, z)?)?)
    }
}

impl<F: PickFunction + ?Sized> PickFunction for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, z: &[C64]) -> Result<C64> {
        (**self).eval(z)
    }
}

pub(crate) fn in_upper_half(z: &[C64]) -> bool {
    z.iter().all(|w| w.im > 0.0)
}

#[cfg(test)]
mod tests {
    use super::fixtures::{bidisk_product, random_upper};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rho_conjugation_inverts() {
        let tr = bidisk_product();
        let twice = conjugate_rho(conjugate_rho(&tr, 0.7), -0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let z = random_upper(&mut rng, 2);
            let a = twice.eval(&z).unwrap();
            let b = PickFunction::eval(&tr, &z).unwrap();
            assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
        }
        assert_eq!(conjugate_rho(&tr, 0.0).eval(&[C64::i(), C64::i()]), PickFunction::eval(&tr, &[C64::i(), C64::i()]));
    }
}
