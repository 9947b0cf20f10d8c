//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid signature (p, q) = ({p}, {q}): need p >= q >= 1; R^{{p,q}} and R^{{q,p}} are anti-isometric, so swap the arguments")]
    InvalidSignature { p: usize, q: usize },

    #[error("the zero vector has no stratum or causal class")]
    ZeroVector,

    #[error("matrix is not an element of so(p,q): {0}")]
    NotInAlgebra(String),

    #[error("subalgebra basis invariant violated: {0}")]
    BasisInvariant(String),

    #[error("k' must span a subalgebra of k0: {0}")]
    InvalidKPrime(String),

    #[error("no closed-form orbit dimension predictor for group {0}; use the rank oracle")]
    UnsupportedPredictor(String),

    #[error("orbit descriptors are defined for N, AN, K0AN and K'AN only (got {0})")]
    UnsupportedDescriptor(String),

    #[error("point lies inside the degenerate subspace W^p")]
    PointInDegenerateSubspace,

    #[error("hyperplane index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("matrix is not nilpotent: power {power} is nonzero")]
    NotNilpotent { power: usize },

    #[error("numeric quality failure: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NumericQuality { residual: f64, tolerance: f64 },

    #[error("unknown suite '{0}'")]
    UnknownSuite(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
