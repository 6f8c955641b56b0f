use alloc::string::String;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NonHermitian { residual: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("tuple does not commute (commutator residual {residual:.3e})")]
    NotCommuting { residual: f64 },
    #[error("joint diagonalization failed (off-diagonal energy {off:.3e})")]
    DiagonalizationFailed { off: f64 },
    #[error("joint spectrum is not generic (minimum gap {gap:.3e})")]
    NotGeneric { gap: f64 },
    #[error(
        "direction is not first-order commuting at ({i},{j}) for coordinates ({r},{s}): residual {residual:.3e}"
    )]
    InconsistentDirection {
        i: usize,
        j: usize,
        r: usize,
        s: usize,
        residual: f64,
    },
    #[error("joint eigenvalue {index} lies outside the function domain")]
    DomainViolation { index: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("nodes {i} and {j} coincide")]
    DegenerateNodes { i: usize, j: usize },
    #[error("matrix is not real skew-symmetric (residual {residual:.3e})")]
    NotSkewSymmetric { residual: f64 },
    #[error("resolvent is singular")]
    SingularResolvent,
    #[error("lifted resolvent I (x) X - S (.) I is singular")]
    SingularLiftedResolvent,
    #[error("linear fractional map hit its pole")]
    PoleHit,
    #[error("block matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("block matrix is not a contraction (norm {norm:.6})")]
    NotContraction { norm: f64 },
    #[error("tau is too close to the spectrum of U (distance {distance:.3e})")]
    TauTooCloseToSpectrum { distance: f64 },
    #[error("constant is not real (imaginary part {imag:.3e})")]
    RealityViolation { imag: f64 },
    #[error("box interval {r} is degenerate")]
    DegenerateBox { r: usize },
    #[error("tau coincides with atom {index}")]
    AtomAtTau { index: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! shape_err {
    ($($arg:tt)*) => {
        $crate::error::Error::ShapeMismatch(alloc::format!($($arg)*))
    };
}
pub(crate) use shape_err;
