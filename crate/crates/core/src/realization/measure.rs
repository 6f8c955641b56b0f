//! Finitely supported measures on the line and on the circle.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::cauchy::CauchyRealization;
use crate::error::{Error, Result};
use crate::linalg::{GradedSpace, Hermitian};
use crate::matrix::C64;

/// Where the atoms live.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    /// Atoms at real locations.
    Line,
    /// Atoms at angles `theta`, i.e. at `e^{i theta}`.
    Circle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    support: Support,
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(support: Support, atoms: Vec<Atom>) -> Result<Self> {
        if let Some(k) = atoms.iter().position(|a| !(a.mass > 0.0 && a.mass.is_finite() && a.location.is_finite())) {
            return Err(Error::InvalidInput(alloc::format!("atom {k} needs a finite location and positive mass")));
        }
        Ok(DiscreteMeasure { support, atoms })
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    fn require(&self, support: Support) -> Result<()> {
        if self.support != support {
            return Err(Error::InvalidInput(alloc::format!("operation needs a measure on the {support:?}")));
        }
        Ok(())
    }
}

/// `X = diag(t_k)`, `v1 = (sqrt(nu_k))`, `C = 0`, so `F(z) = sum nu_k / (t_k - z)`.
pub fn from_discrete_measure(mu: &DiscreteMeasure) -> Result<CauchyRealization> {
    mu.require(Support::Line)?;
    if mu.atoms.is_empty() {
        return Err(Error::InvalidInput("measure has no atoms".into()));
    }
    let locs: Vec<f64> = mu.atoms.iter().map(|a| a.location).collect();
    let v1 = mu.atoms.iter().map(|a| C64::new(a.mass.sqrt(), 0.0)).collect();
    CauchyRealization::new(0.0, Hermitian::from_real_diag(&locs), v1, GradedSpace::new(alloc::vec![locs.len()])?)
}

/// `sum nu_k (e^{i theta_k} + lambda) / (e^{i theta_k} - lambda)` for `|lambda| < 1`.
pub fn herglotz_eval(mu: &DiscreteMeasure, lambda: C64) -> Result<C64> {
    mu.require(Support::Circle)?;
    if lambda.norm() >= 1.0 {
        return Err(Error::InvalidInput("lambda must lie in the open disk".into()));
    }
    Ok(mu
        .atoms
        .iter()
        .map(|a| {
            let e = C64::from_polar(1.0, a.location);
            (e + lambda) / (e - lambda) * a.mass
        })
        .sum())
}

/// `sum nu_k / |e^{i theta_k} - tau|^2`; an atom at `tau` itself is
/// reported as [`Error::AtomAtTau`].
pub fn bpoint_sum(mu: &DiscreteMeasure, tau: C64) -> Result<f64> {
    mu.require(Support::Circle)?;
    let mut total = 0.0;
    for (index, a) in mu.atoms.iter().enumerate() {
        let gap = (C64::from_polar(1.0, a.location) - tau).norm_sqr();
        if gap <= 1e-28 {
            return Err(Error::AtomAtTau { index });
        }
        total += a.mass / gap;
    }
    Ok(total)
}
