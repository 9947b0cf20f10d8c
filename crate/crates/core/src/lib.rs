//! Exact computational toolkit for linear group actions on the
//! pseudo-Euclidean space R^{p,q}.
//!
//! The crate builds the Iwasawa decomposition `so(p,q) = k ⊕ a ⊕ n`
//! explicitly over the rationals, classifies points of R^{p,q} by causal
//! type and degeneration stratum, and computes orbit dimensions of the
//! groups N, A, K0, AN, K0AN, K'AN and SO(p,q) two ways: from the
//! closed-form stratum predictors and from an exact rank oracle on the
//! stacked tangent matrix. The [`verify`] module packages the comparisons
//! into deterministic pass/fail suites.
//!
//! All rank decisions use arbitrary-precision rational arithmetic; floating
//! point appears only in [`flows`], which corroborates the infinitesimal
//! picture at group level via matrix exponentials.

pub mod error;
pub mod exact;
pub mod flows;
pub mod lie;
pub mod orbits;
pub mod space;
pub mod verify;

pub use error::{Error, Result};

pub(crate) fn serialize_rational<S: serde::Serializer>(
    x: &exact::Rational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&exact::format_rational(x))
}

pub(crate) fn serialize_opt_rational<S: serde::Serializer>(
    x: &Option<exact::Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&exact::format_rational(v)),
        None => s.serialize_none(),
    }
}
pub use exact::{Matrix, Rational, Vector};
pub use flows::{FlowSample, GroupElement};
pub use lie::{LieElement, RestrictedRoot, RootDatum, SubalgebraBasis, SubalgebraLabel};
pub use orbits::{GroupChoice, OrbitDescriptor, OrbitReport, SamplePlan, SampleSet};
pub use space::{CausalClass, CausalType, Sign, Signature, StratumDescriptor};
pub use verify::{SuiteId, SuiteResult, SuiteStatus};
