//! The geometry of R^{p,q}: indefinite scalar product, causal
//! classification, the degeneration hyperplanes, and the stratum indices
//! that drive every orbit dimension formula.
//!
//! Conventions. The scalar product is
//! `<x,y> = sum_{i<=p} x^i y^i - sum_{j>p} x^j y^j`. For `1 <= i <= q`,
//! `Pi_i` is the hyperplane `x^{p-i+1} + x^{p+i} = 0`, with null normal
//! `w_i = e_{p-i+1} - e_{p+i}`; their intersection `W^p` is the
//! p-dimensional degenerate subspace. For `1 <= j <= p-q`, `P_j` is the
//! coordinate hyperplane `x^j = 0`. Indices are one-based in the public
//! vocabulary throughout this crate.

use num_traits::{Signed, Zero};
use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact::{Rational, Vector};

/// Signature (p, q) with p >= q >= 1.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Signature {
    p: usize,
    q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if q < 1 || p < q {
            return Err(Error::InvalidSignature { p, q });
        }
        Ok(Signature { p, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Ambient dimension p + q.
    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Standard basis vector e_i (one-based, 1 <= i <= p+q).
    pub fn basis_vector(&self, i: usize) -> Vector {
        assert!((1..=self.dim()).contains(&i), "basis index out of range");
        Vector::unit(self.dim(), i - 1)
    }

    /// Null normal `w_i = e_{p-i+1} - e_{p+i}` of the hyperplane Pi_i.
    pub fn w_vector(&self, i: usize) -> Vector {
        assert!((1..=self.q).contains(&i), "w index out of range");
        let mut v = Vector::zero(self.dim());
        v.set(self.p - i, Rational::from_integer(1.into()));
        v.set(self.p + i - 1, Rational::from_integer((-1).into()));
        v
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "vector has dimension {} but the space is R^{{{},{}}} of dimension {}",
                v.dim(),
                self.p,
                self.q,
                self.dim()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Sign of a nonzero rational quantity.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Sign {
    /// `None` exactly when the argument is zero.
    pub fn of(x: &Rational) -> Option<Sign> {
        if x.is_zero() {
            None
        } else if x.is_positive() {
            Some(Sign::Plus)
        } else {
            Some(Sign::Minus)
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+"),
            Sign::Minus => write!(f, "-"),
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalClass {
    Zero,
    Spacelike,
    Timelike,
    Lightlike,
}

/// Causal classification of a vector: the class, the exact norm `<x,x>`,
/// and — only when q = 1, where time orientation is meaningful — the sign
/// of `<x, e_{p+1}>` for timelike and lightlike vectors.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CausalType {
    pub class: CausalClass,
    #[serde(serialize_with = "crate::serialize_rational")]
    pub norm: Rational,
    pub time_sign: Option<Sign>,
}

/// Which family of level sets of `<.,.>` a nonzero point lies on.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub enum HyperquadricFamily {
    /// Pseudo-sphere `S^{p-1,q}(r)`: `<x,x> = r^2 > 0`.
    #[serde(rename = "S")]
    Sphere,
    /// Pseudo-hyperbolic space `H^{p,q-1}(r)`: `<x,x> = -r^2 < 0`.
    #[serde(rename = "H")]
    Hyperbolic,
    /// Null cone `Lambda^{p+q-1}`: `<x,x> = 0`, x != 0.
    #[serde(rename = "Lambda")]
    NullCone,
}

/// Stratum data of a nonzero point.
///
/// Exactly one of `k_index` / `in_all_pi` holds: `k_index = k` means k is
/// the least i with `x` outside `Pi_i`; otherwise `x` lies in `W^p`.
/// `l_index` is defined only in the fully degenerate case (`in_all_pi` and
/// `in_all_p`), as the largest j with `x^{p+j} != 0`. `sign_label` fixes
/// which of the two connected pieces of the stratum the point inhabits:
/// the sign of `x^{p-k+1}+x^{p+k}` (case a), of `x^1` (case b with
/// p = q+1), or of the coordinate `x^{p+l}` (case c).
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StratumDescriptor {
    pub k_index: Option<usize>,
    pub in_all_pi: bool,
    pub in_all_p: bool,
    pub l_index: Option<usize>,
    pub sign_label: Option<Sign>,
    /// r^2 of the hyperquadric through the point (zero on the null cone).
    #[serde(serialize_with = "crate::serialize_rational")]
    pub radius_squared: Rational,
}

/// Which of the three stratum cases a point falls in.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
pub enum StratumCase {
    /// Outside some Pi_i; carries k.
    A(usize),
    /// In every Pi_i, outside some P_j.
    B,
    /// In every Pi_i and every P_j; carries l.
    C(usize),
}

impl StratumDescriptor {
    pub fn case(&self) -> StratumCase {
        if let Some(k) = self.k_index {
            StratumCase::A(k)
        } else if let Some(l) = self.l_index {
            StratumCase::C(l)
        } else {
            StratumCase::B
        }
    }
}

impl fmt::Display for StratumCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StratumCase::A(k) => write!(f, "a(k={k})"),
            StratumCase::B => write!(f, "b"),
            StratumCase::C(l) => write!(f, "c(l={l})"),
        }
    }
}

/// The indefinite scalar product of signature (p, q).
pub fn scalar_product(x: &Vector, y: &Vector, sig: Signature) -> Result<Rational> {
    sig.check_dim(x)?;
    sig.check_dim(y)?;
    let mut acc = Rational::zero();
    for i in 0..sig.p() {
        acc += x.get(i) * y.get(i);
    }
    for j in sig.p()..sig.dim() {
        acc -= x.get(j) * y.get(j);
    }
    Ok(acc)
}

/// Squared norm `<x,x>`.
pub fn norm_squared(x: &Vector, sig: Signature) -> Result<Rational> {
    scalar_product(x, x, sig)
}

/// Causal class of a vector, with time orientation when q = 1.
pub fn causal_classify(x: &Vector, sig: Signature) -> Result<CausalType> {
    sig.check_dim(x)?;
    let norm = norm_squared(x, sig)?;
    let class = if x.is_zero() {
        CausalClass::Zero
    } else if norm.is_positive() {
        CausalClass::Spacelike
    } else if norm.is_negative() {
        CausalClass::Timelike
    } else {
        CausalClass::Lightlike
    };
    let time_sign =
        if sig.q() == 1 && matches!(class, CausalClass::Timelike | CausalClass::Lightlike) {
            // <x, e_{p+1}> = -x^{p+1}
            Sign::of(&(-x.get(sig.p()).clone()))
        } else {
            None
        };
    Ok(CausalType {
        class,
        norm,
        time_sign,
    })
}

/// True when `x` lies on the hyperplane Pi_i (`1 <= i <= q`).
pub fn in_pi(x: &Vector, sig: Signature, i: usize) -> Result<bool> {
    sig.check_dim(x)?;
    if !(1..=sig.q()).contains(&i) {
        return Err(Error::IndexOutOfRange(format!(
            "Pi index {i} not in 1..={}",
            sig.q()
        )));
    }
    Ok((x.get(sig.p() - i) + x.get(sig.p() + i - 1)).is_zero())
}

/// True when `x` lies on the coordinate hyperplane P_j (`1 <= j <= p-q`).
/// Rejected as a usage error when p = q, where no P_j exists.
pub fn in_p_hyperplane(x: &Vector, sig: Signature, j: usize) -> Result<bool> {
    sig.check_dim(x)?;
    if sig.p() == sig.q() {
        return Err(Error::IndexOutOfRange(
            "no coordinate hyperplanes P_j exist when p = q".into(),
        ));
    }
    if !(1..=sig.p() - sig.q()).contains(&j) {
        return Err(Error::IndexOutOfRange(format!(
            "P index {j} not in 1..={}",
            sig.p() - sig.q()
        )));
    }
    Ok(x.get(j - 1).is_zero())
}

/// True when `x` lies in the degenerate subspace `W^p` (all Pi_i).
pub fn in_w(x: &Vector, sig: Signature) -> Result<bool> {
    sig.check_dim(x)?;
    Ok((1..=sig.q()).all(|i| (x.get(sig.p() - i) + x.get(sig.p() + i - 1)).is_zero()))
}

/// Hyperquadric through a nonzero point: `(S, r^2)`, `(H, r^2)` or the
/// null cone `(Lambda, 0)`.
pub fn hyperquadric_radius(x: &Vector, sig: Signature) -> Result<(HyperquadricFamily, Rational)> {
    sig.check_dim(x)?;
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let norm = norm_squared(x, sig)?;
    if norm.is_positive() {
        Ok((HyperquadricFamily::Sphere, norm))
    } else if norm.is_negative() {
        Ok((HyperquadricFamily::Hyperbolic, -norm))
    } else {
        Ok((HyperquadricFamily::NullCone, Rational::zero()))
    }
}

/// Full stratum classification of a nonzero point.
pub fn stratum(x: &Vector, sig: Signature) -> Result<StratumDescriptor> {
    sig.check_dim(x)?;
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let (p, q) = (sig.p(), sig.q());
    let k_index = (1..=q).find(|&i| !(x.get(p - i) + x.get(p + i - 1)).is_zero());
    let in_all_pi = k_index.is_none();
    // vacuously true when p = q
    let in_all_p = (0..p - q).all(|j| x.get(j).is_zero());

    let mut l_index = None;
    let mut sign_label = None;
    match k_index {
        Some(k) => {
            sign_label = Sign::of(&(x.get(p - k) + x.get(p + k - 1)));
            debug_assert!(sign_label.is_some());
        }
        None => {
            if in_all_p {
                // fully degenerate: x is a combination of the w_i
                let l = (1..=q).rev().find(|&j| !x.get(p + j - 1).is_zero());
                debug_assert!(
                    l.is_some(),
                    "nonzero point of case (c) has some x^{{p+j}} != 0"
                );
                l_index = l;
                if let Some(l) = l {
                    sign_label = Sign::of(x.get(p + l - 1));
                }
            } else if p == q + 1 {
                // the sphere factor S^{p-q-1} degenerates to two points
                sign_label = Sign::of(x.get(0));
            }
        }
    }
    let radius_squared = norm_squared(x, sig)?.abs();
    Ok(StratumDescriptor {
        k_index,
        in_all_pi,
        in_all_p,
        l_index,
        sign_label,
        radius_squared,
    })
}
