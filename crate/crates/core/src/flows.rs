//! Group-level corroboration of the infinitesimal picture: exponentials
//! and orbit curves.
//!
//! Three exponential paths, cross-checked where their domains overlap:
//! an exact terminating series for nilpotent elements, the closed
//! hyperbolic form for elements of a, and scaling-and-squaring with a
//! truncated series for everything else. The hyperbolic functions are
//! irrational, so the numeric paths carry a declared tolerance; the
//! nilpotent path is exact and must satisfy the O(p,q) identity with zero
//! residual.

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{Matrix, Rational, Vector};
use crate::lie::{self, LieElement};
use crate::space::Signature;

/// Tolerance for the O(p,q) identity `g^t eta g = eta` on numeric paths.
pub const OPQ_TOLERANCE: f64 = 1e-9;
/// Tolerance for agreement between two exponential paths on shared domain.
pub const CROSS_PATH_TOLERANCE: f64 = 1e-10;
/// Finite-difference tangency tolerance at step [`TANGENCY_STEP`].
pub const TANGENCY_TOLERANCE: f64 = 1e-5;
pub const TANGENCY_STEP: f64 = 1e-6;

/// Truncation order of the scaling-and-squaring series.
const SERIES_ORDER: usize = 12;
/// Scale until the 1-norm of the exponent is below this threshold.
const SCALING_THRESHOLD: f64 = 0.5;

// -- small f64 matrix helpers (floating point lives only in this module) -----

type FMat = Vec<Vec<f64>>;

fn fidentity(n: usize) -> FMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn fmul(a: &FMat, b: &FMat) -> FMat {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..inner {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn norm1(a: &FMat) -> f64 {
    let cols = a[0].len();
    (0..cols)
        .map(|j| a.iter().map(|row| row[j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn fmatvec(a: &FMat, v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Indefinite scalar product in floating point.
pub fn minkowski_f64(sig: Signature, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..sig.p() {
        acc += a[i] * b[i];
    }
    for j in sig.p()..sig.dim() {
        acc -= a[j] * b[j];
    }
    acc
}

/// Largest entrywise violation of `g^t eta g = eta`.
fn opq_residual_f64(sig: Signature, g: &FMat) -> f64 {
    let n = sig.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for (k, row) in g.iter().enumerate() {
                let eta_k = if k < sig.p() { 1.0 } else { -1.0 };
                acc += row[i] * eta_k * row[j];
            }
            let want = if i == j {
                if i < sig.p() {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            };
            worst = worst.max((acc - want).abs());
        }
    }
    worst
}

/// A group element of O(p,q): exact rational matrix on the nilpotent
/// path, floating-point matrix on the numeric paths.
#[derive(Clone, Debug)]
pub enum GroupElement {
    Exact { sig: Signature, mat: Matrix },
    Numeric { sig: Signature, mat: FMat },
}

impl GroupElement {
    pub fn sig(&self) -> Signature {
        match self {
            GroupElement::Exact { sig, .. } | GroupElement::Numeric { sig, .. } => *sig,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, GroupElement::Exact { .. })
    }

    pub fn exact_matrix(&self) -> Option<&Matrix> {
        match self {
            GroupElement::Exact { mat, .. } => Some(mat),
            GroupElement::Numeric { .. } => None,
        }
    }

    pub fn to_f64(&self) -> FMat {
        match self {
            GroupElement::Exact { mat, .. } => mat.to_f64(),
            GroupElement::Numeric { mat, .. } => mat.clone(),
        }
    }

    /// O(p,q) identity residual: exactly zero (reported as 0.0) on the
    /// exact path, the entrywise float residual otherwise.
    pub fn opq_residual(&self) -> f64 {
        match self {
            GroupElement::Exact { sig, mat } => {
                let e = lie::eta(*sig);
                if mat.transpose().mul(&e).mul(mat) == e {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            GroupElement::Numeric { sig, mat } => opq_residual_f64(*sig, mat),
        }
    }

    pub fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        let m = self.to_f64();
        fmatvec(&m, x)
    }

    /// Exact action on a rational point (exact path only).
    pub fn apply_exact(&self, x: &Vector) -> Option<Vector> {
        match self {
            GroupElement::Exact { mat, .. } => crate::exact::matvec(mat, x).ok(),
            GroupElement::Numeric { .. } => None,
        }
    }

    /// Product; exact only when both factors are exact.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let sig = self.sig();
        match (self, other) {
            (GroupElement::Exact { mat: a, .. }, GroupElement::Exact { mat: b, .. }) => {
                GroupElement::Exact { sig, mat: a.mul(b) }
            }
            _ => GroupElement::Numeric {
                sig,
                mat: fmul(&self.to_f64(), &other.to_f64()),
            },
        }
    }
}

/// Exact exponential of a nilpotent element: the series terminates at
/// power p+q-1. Rejects inputs with a nonzero (p+q)-th power.
pub fn exp_nilpotent(x: &LieElement) -> Result<GroupElement> {
    let sig = x.sig();
    let n = sig.dim();
    if !x.matrix().pow(n).is_zero() {
        return Err(Error::NotNilpotent { power: n });
    }
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..n {
        term = term
            .mul(x.matrix())
            .scale(&Rational::new(1.into(), (k as i64).into()));
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term);
    }
    let g = GroupElement::Exact { sig, mat: sum };
    debug_assert_eq!(g.opq_residual(), 0.0);
    Ok(g)
}

/// Closed-form exponential of the a-element with parameters c: identity
/// on `e_1..e_{p-q}` and hyperbolic 2x2 blocks coupling `e_{p-i+1}` with
/// `e_{p+i}`, with entries `cosh(c_i)` and `sinh(c_i)`.
pub fn exp_a(sig: Signature, c: &[f64]) -> GroupElement {
    assert_eq!(c.len(), sig.q(), "need one parameter per a-generator");
    let (p, n) = (sig.p(), sig.dim());
    let mut m = vec![vec![0.0; n]; n];
    for (j, row) in m.iter_mut().enumerate().take(p - sig.q()) {
        row[j] = 1.0;
    }
    for i in 1..=sig.q() {
        let (ch, sh) = (c[i - 1].cosh(), c[i - 1].sinh());
        m[p - i][p - i] = ch;
        m[p + i - 1][p + i - 1] = ch;
        m[p + i - 1][p - i] = sh;
        m[p - i][p + i - 1] = sh;
    }
    GroupElement::Numeric { sig, mat: m }
}

/// Numeric `exp(tX)` by scaling and squaring with a truncated series.
/// Fails when the O(p,q) residual of the result exceeds [`OPQ_TOLERANCE`].
pub fn exp_generic(x: &LieElement, t: f64) -> Result<GroupElement> {
    let sig = x.sig();
    let n = sig.dim();
    let mut a = x.matrix().to_f64();
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v *= t;
        }
    }
    let mut squarings = 0u32;
    let mut scale = norm1(&a);
    while scale > SCALING_THRESHOLD && squarings < 64 {
        scale /= 2.0;
        squarings += 1;
    }
    let factor = 0.5f64.powi(squarings as i32);
    let b: FMat = a
        .iter()
        .map(|row| row.iter().map(|v| v * factor).collect())
        .collect();
    let mut sum = fidentity(n);
    let mut term = fidentity(n);
    for k in 1..=SERIES_ORDER {
        term = fmul(&term, &b);
        let inv = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv;
            }
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = fmul(&sum, &sum);
    }
    let g = GroupElement::Numeric { sig, mat: sum };
    let residual = g.opq_residual();
    if residual > OPQ_TOLERANCE {
        return Err(Error::NumericQuality {
            residual,
            tolerance: OPQ_TOLERANCE,
        });
    }
    Ok(g)
}

/// One sample of an orbit curve `gamma(t) = exp(tX) x`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlowSample {
    pub t: f64,
    pub point: Vec<f64>,
    /// `|<gamma(t), gamma(t)> - <x, x>|`: the flow must stay on the level
    /// set of the scalar product.
    pub norm_residual: f64,
}

/// Samples the orbit curve of x under the one-parameter group of X.
pub fn flow_curve(x: &LieElement, point: &Vector, t_grid: &[f64]) -> Result<Vec<FlowSample>> {
    let sig = x.sig();
    if point.dim() != sig.dim() {
        return Err(Error::Shape(format!(
            "point has dimension {} but the space has dimension {}",
            point.dim(),
            sig.dim()
        )));
    }
    let x0 = point.to_f64();
    let base_norm = minkowski_f64(sig, &x0, &x0);
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let g = exp_generic(x, t)?;
        let gamma = g.apply_f64(&x0);
        let norm_residual = (minkowski_f64(sig, &gamma, &gamma) - base_norm).abs();
        out.push(FlowSample {
            t,
            point: gamma,
            norm_residual,
        });
    }
    Ok(out)
}

/// Default sampling grid: 61 uniform points on [-3, 3].
pub fn default_t_grid() -> Vec<f64> {
    uniform_grid(-3.0, 3.0, 61)
}

/// `steps` uniform samples on [t_min, t_max] (a single step lands on t_min).
pub fn uniform_grid(t_min: f64, t_max: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![t_min];
    }
    let h = (t_max - t_min) / (steps - 1) as f64;
    (0..steps).map(|i| t_min + h * i as f64).collect()
}

/// Converts an exact rational to f64 for handing points to the flow.
pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
