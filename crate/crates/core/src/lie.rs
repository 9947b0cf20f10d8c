//! Construction of so(p,q): block structure, Cartan decomposition, the
//! maximal abelian subspace a, the centralizer piece k0, restricted roots
//! with their root spaces, the nilpotent factor n, and assembly of the
//! subalgebras of N, A, K0, AN, K0AN, K'AN and SO(p,q).
//!
//! Elements are written in the block form
//!
//! ```text
//!     X = | A  B   |      A in so(p), D in so(q), B arbitrary p x q,
//!         | B^t D  |
//! ```
//!
//! which is exactly the condition `X^t eta + eta X = 0` for
//! `eta = diag(+1 x p, -1 x q)`. The subspace a consists of the matrices
//! whose B block carries parameters `c_1..c_q` on the anti-diagonal
//! `B_{p-i+1,i} = c_i`; the functional `f_i` takes the value `-c_i` there.
//! Root spaces are computed by solving the ad-eigenvalue system
//! `[H, X] = alpha(H) X` exactly over the coordinates of the so(p,q)
//! basis — the entry patterns that can be read off by hand serve as test
//! oracles, not as the construction.

use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::exact::{self, Matrix, Rational, SpanChecker, Vector};
use crate::space::{Sign, Signature};

/// Element of so(p,q), validated at construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LieElement {
    sig: Signature,
    mat: Matrix,
}

/// Diagonal metric matrix `eta = diag(+1 x p, -1 x q)`.
pub fn eta(sig: Signature) -> Matrix {
    let mut m = Matrix::zero(sig.dim(), sig.dim());
    for i in 0..sig.p() {
        m.set(i, i, Rational::one());
    }
    for j in sig.p()..sig.dim() {
        m.set(j, j, -Rational::one());
    }
    m
}

/// Membership test `X^t eta + eta X = 0`.
pub fn is_in_so(sig: Signature, mat: &Matrix) -> bool {
    if mat.rows() != sig.dim() || mat.cols() != sig.dim() {
        return false;
    }
    let e = eta(sig);
    mat.transpose().mul(&e).add(&e.mul(mat)).is_zero()
}

impl LieElement {
    pub fn from_matrix(sig: Signature, mat: Matrix) -> Result<Self> {
        if mat.rows() != sig.dim() || mat.cols() != sig.dim() {
            return Err(Error::Shape(format!(
                "expected a {} x {} matrix",
                sig.dim(),
                sig.dim()
            )));
        }
        if !is_in_so(sig, &mat) {
            return Err(Error::NotInAlgebra(
                "X^t eta + eta X != 0 (A or D not antisymmetric, or lower-left != B^t)".into(),
            ));
        }
        Ok(LieElement { sig, mat })
    }

    pub fn zero(sig: Signature) -> Self {
        LieElement {
            sig,
            mat: Matrix::zero(sig.dim(), sig.dim()),
        }
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    /// Entry of the A block, one-based (`1 <= i, j <= p`).
    pub fn a_entry(&self, i: usize, j: usize) -> &Rational {
        self.mat.get(i - 1, j - 1)
    }

    /// Entry of the B block, one-based (`1 <= i <= p`, `1 <= j <= q`).
    pub fn b_entry(&self, i: usize, j: usize) -> &Rational {
        self.mat.get(i - 1, self.sig.p() + j - 1)
    }

    /// Entry of the D block, one-based (`1 <= i, j <= q`).
    pub fn d_entry(&self, i: usize, j: usize) -> &Rational {
        self.mat.get(self.sig.p() + i - 1, self.sig.p() + j - 1)
    }

    pub fn bracket(&self, other: &LieElement) -> LieElement {
        debug_assert_eq!(self.sig, other.sig);
        let m = self.mat.mul(&other.mat).sub(&other.mat.mul(&self.mat));
        LieElement {
            sig: self.sig,
            mat: m,
        }
    }

    pub fn add(&self, other: &LieElement) -> LieElement {
        LieElement {
            sig: self.sig,
            mat: self.mat.add(&other.mat),
        }
    }

    pub fn scale(&self, c: &Rational) -> LieElement {
        LieElement {
            sig: self.sig,
            mat: self.mat.scale(c),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }

    /// The matrix as a point of R^{(p+q)^2}, for span computations.
    pub fn flatten(&self) -> Vector {
        self.mat.flatten()
    }

    /// Action on a point: the vector `X x`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        exact::matvec(&self.mat, x)
    }

    /// Cartan involution `theta(X) = -X^t`.
    pub fn theta(&self) -> LieElement {
        LieElement {
            sig: self.sig,
            mat: self.mat.transpose().scale(&-Rational::one()),
        }
    }

    /// True when `X^{p+q} = 0` exactly.
    pub fn is_nilpotent(&self) -> bool {
        self.mat.pow(self.sig.dim()).is_zero()
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mat)
    }
}

/// Which subalgebra (or distinguished subspace) a basis spans.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubalgebraLabel {
    So,
    K,
    /// Cartan complement p: a subspace, not a subalgebra (the bracket of
    /// two p-elements lands in k), so it is exempt from the closure check.
    PCartan,
    A,
    K0,
    N,
    An,
    K0An,
    KPrimeAn,
    RootSpace,
}

impl SubalgebraLabel {
    fn closed_under_bracket(self) -> bool {
        !matches!(self, SubalgebraLabel::PCartan)
    }

    pub fn name(self) -> &'static str {
        match self {
            SubalgebraLabel::So => "so",
            SubalgebraLabel::K => "k",
            SubalgebraLabel::PCartan => "p",
            SubalgebraLabel::A => "a",
            SubalgebraLabel::K0 => "k0",
            SubalgebraLabel::N => "n",
            SubalgebraLabel::An => "an",
            SubalgebraLabel::K0An => "k0an",
            SubalgebraLabel::KPrimeAn => "kprime-an",
            SubalgebraLabel::RootSpace => "root-space",
        }
    }
}

/// Ordered, linearly independent basis of a subalgebra, checked at
/// construction: every element lies in so(p,q), the flattened matrices
/// have full rank, and (except for the Cartan complement) every bracket
/// `[X_i, X_j]` reduces to zero against the echelonized span.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis {
    sig: Signature,
    label: SubalgebraLabel,
    elements: Vec<LieElement>,
}

impl SubalgebraBasis {
    pub fn try_new(
        sig: Signature,
        label: SubalgebraLabel,
        elements: Vec<LieElement>,
    ) -> Result<Self> {
        let n2 = sig.dim() * sig.dim();
        for (idx, e) in elements.iter().enumerate() {
            if e.sig() != sig {
                return Err(Error::BasisInvariant(format!(
                    "element {idx} has signature {} but the basis is for {}",
                    e.sig(),
                    sig
                )));
            }
        }
        let checker = SpanChecker::new(n2, elements.iter().map(|e| e.flatten()));
        if checker.rank() != elements.len() {
            return Err(Error::BasisInvariant(format!(
                "{} elements span only {} dimensions",
                elements.len(),
                checker.rank()
            )));
        }
        if label.closed_under_bracket() {
            // a basis spanning all of so(p,q) is closed automatically;
            // membership in so(p,q) is checked element-wise above
            let full = so_dim(sig);
            if elements.len() < full {
                for i in 0..elements.len() {
                    for j in i + 1..elements.len() {
                        let br = elements[i].bracket(&elements[j]);
                        if !checker.contains(&br.flatten()) {
                            return Err(Error::BasisInvariant(format!(
                                "bracket of elements {i} and {j} escapes the span of {}",
                                label.name()
                            )));
                        }
                    }
                }
            }
        }
        Ok(SubalgebraBasis {
            sig,
            label,
            elements,
        })
    }

    /// Internal constructor: invariant failure here is a construction bug.
    fn assemble(sig: Signature, label: SubalgebraLabel, elements: Vec<LieElement>) -> Self {
        Self::try_new(sig, label, elements).unwrap_or_else(|e| {
            panic!(
                "internal basis construction for {} failed: {e}",
                label.name()
            )
        })
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn label(&self) -> SubalgebraLabel {
        self.label
    }

    pub fn elements(&self) -> &[LieElement] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Echelonized span of the flattened elements.
    pub fn span_checker(&self) -> SpanChecker {
        SpanChecker::new(
            self.sig.dim() * self.sig.dim(),
            self.elements.iter().map(|e| e.flatten()),
        )
    }

    pub fn contains(&self, x: &LieElement) -> bool {
        self.span_checker().contains(&x.flatten())
    }

    /// Linear combination of the basis elements.
    pub fn combination(&self, coeffs: &[Rational]) -> LieElement {
        assert_eq!(coeffs.len(), self.elements.len());
        let mut acc = LieElement::zero(self.sig);
        for (c, e) in coeffs.iter().zip(&self.elements) {
            if !c.is_zero() {
                acc = acc.add(&e.scale(c));
            }
        }
        acc
    }
}

/// dim so(p,q) = (p+q)(p+q-1)/2.
pub fn so_dim(sig: Signature) -> usize {
    let n = sig.dim();
    n * (n - 1) / 2
}

/// dim n = q(p-1).
pub fn n_dim(sig: Signature) -> usize {
    sig.q() * (sig.p() - 1)
}

/// dim k0 = (p-q)(p-q-1)/2.
pub fn k0_dim(sig: Signature) -> usize {
    let m = sig.p() - sig.q();
    if m < 2 {
        0
    } else {
        m * (m - 1) / 2
    }
}

// -- elementary generators ---------------------------------------------------

/// Generator with `A_{ij} = 1 = -A_{ji}` (one-based, i < j <= p).
fn gen_a(sig: Signature, i: usize, j: usize) -> LieElement {
    debug_assert!(i < j && j <= sig.p());
    let mut m = Matrix::zero(sig.dim(), sig.dim());
    m.set(i - 1, j - 1, Rational::one());
    m.set(j - 1, i - 1, -Rational::one());
    LieElement { sig, mat: m }
}

/// Generator with `D_{ij} = 1 = -D_{ji}` (one-based, i < j <= q).
fn gen_d(sig: Signature, i: usize, j: usize) -> LieElement {
    debug_assert!(i < j && j <= sig.q());
    let p = sig.p();
    let mut m = Matrix::zero(sig.dim(), sig.dim());
    m.set(p + i - 1, p + j - 1, Rational::one());
    m.set(p + j - 1, p + i - 1, -Rational::one());
    LieElement { sig, mat: m }
}

/// Generator with `B_{ij} = 1` and the mirrored `(B^t)_{ji} = 1`.
fn gen_b(sig: Signature, i: usize, j: usize) -> LieElement {
    debug_assert!(i <= sig.p() && j <= sig.q());
    let p = sig.p();
    let mut m = Matrix::zero(sig.dim(), sig.dim());
    m.set(i - 1, p + j - 1, Rational::one());
    m.set(p + j - 1, i - 1, Rational::one());
    LieElement { sig, mat: m }
}

/// Construction results are deterministic per signature, so the two hot
/// constructors keep a process-wide memo; callers receive clones.
fn memo<F: FnOnce() -> SubalgebraBasis>(
    cache: &'static OnceLock<Mutex<HashMap<(usize, usize), SubalgebraBasis>>>,
    sig: Signature,
    build: F,
) -> SubalgebraBasis {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = map.lock().unwrap().get(&(sig.p(), sig.q())) {
        return hit.clone();
    }
    let built = build();
    map.lock()
        .unwrap()
        .entry((sig.p(), sig.q()))
        .or_insert_with(|| built.clone());
    built
}

/// Basis of so(p,q), ordered A block, then D block, then B block.
pub fn so_basis(sig: Signature) -> SubalgebraBasis {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), SubalgebraBasis>>> = OnceLock::new();
    memo(&CACHE, sig, || {
        let (p, q) = (sig.p(), sig.q());
        let mut elements = Vec::with_capacity(so_dim(sig));
        for i in 1..=p {
            for j in i + 1..=p {
                elements.push(gen_a(sig, i, j));
            }
        }
        for i in 1..=q {
            for j in i + 1..=q {
                elements.push(gen_d(sig, i, j));
            }
        }
        for i in 1..=p {
            for j in 1..=q {
                elements.push(gen_b(sig, i, j));
            }
        }
        SubalgebraBasis::assemble(sig, SubalgebraLabel::So, elements)
    })
}

/// Cartan decomposition for `theta(X) = -X^t`: the +1 eigenspace k
/// (block diagonal, so(p) x so(q)) and the -1 eigenspace p (off-diagonal).
pub fn cartan_decompose(sig: Signature) -> (SubalgebraBasis, SubalgebraBasis) {
    let (p, q) = (sig.p(), sig.q());
    let mut k = Vec::new();
    for i in 1..=p {
        for j in i + 1..=p {
            k.push(gen_a(sig, i, j));
        }
    }
    for i in 1..=q {
        for j in i + 1..=q {
            k.push(gen_d(sig, i, j));
        }
    }
    let mut pp = Vec::new();
    for i in 1..=p {
        for j in 1..=q {
            pp.push(gen_b(sig, i, j));
        }
    }
    (
        SubalgebraBasis::assemble(sig, SubalgebraLabel::K, k),
        SubalgebraBasis::assemble(sig, SubalgebraLabel::PCartan, pp),
    )
}

/// Generator `H^{(i)}` of a: the anti-diagonal B entry `B_{p-i+1,i} = 1`.
fn gen_h(sig: Signature, i: usize) -> LieElement {
    gen_b(sig, sig.p() - i + 1, i)
}

/// Basis `H^{(1)}, ..., H^{(q)}` of the maximal abelian subspace a.
pub fn build_a(sig: Signature) -> SubalgebraBasis {
    let elements = (1..=sig.q()).map(|i| gen_h(sig, i)).collect();
    SubalgebraBasis::assemble(sig, SubalgebraLabel::A, elements)
}

/// The element of a with parameters `c = (c_1, ..., c_q)`.
pub fn a_element(sig: Signature, c: &[Rational]) -> LieElement {
    assert_eq!(c.len(), sig.q());
    build_a(sig).combination(c)
}

/// Basis of k0 = so(p-q), embedded in the top-left block. Empty when
/// p <= q + 1.
pub fn build_k0(sig: Signature) -> SubalgebraBasis {
    let m = sig.p() - sig.q();
    let mut elements = Vec::new();
    for i in 1..=m {
        for j in i + 1..=m {
            elements.push(gen_a(sig, i, j));
        }
    }
    SubalgebraBasis::assemble(sig, SubalgebraLabel::K0, elements)
}

// -- restricted roots --------------------------------------------------------

/// A restricted root: `s*f_l` or `s_i*f_i + s_j*f_j` with i < j.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum RestrictedRoot {
    Single {
        l: usize,
        sign: Sign,
    },
    Pair {
        i: usize,
        j: usize,
        sign_i: Sign,
        sign_j: Sign,
    },
}

impl RestrictedRoot {
    /// Value of the root on the generator `H^{(m)}`; `f_i` takes the value
    /// `-c_i` on the a-element with parameters c, so on `H^{(m)}` it is
    /// `-delta_{im}`.
    pub fn eval(&self, m: usize) -> Rational {
        let term = |idx: usize, sign: Sign| -> i64 {
            if idx == m {
                match sign {
                    Sign::Plus => -1,
                    Sign::Minus => 1,
                }
            } else {
                0
            }
        };
        match *self {
            RestrictedRoot::Single { l, sign } => exact::rat_int(term(l, sign)),
            RestrictedRoot::Pair {
                i,
                j,
                sign_i,
                sign_j,
            } => exact::rat_int(term(i, sign_i) + term(j, sign_j)),
        }
    }

    /// Positivity under the lexicographic order: the coefficient of the
    /// earliest f-index decides.
    pub fn is_positive(&self) -> bool {
        match *self {
            RestrictedRoot::Single { sign, .. } => sign == Sign::Plus,
            RestrictedRoot::Pair { sign_i, .. } => sign_i == Sign::Plus,
        }
    }

    pub fn negated(&self) -> RestrictedRoot {
        match *self {
            RestrictedRoot::Single { l, sign } => RestrictedRoot::Single {
                l,
                sign: sign.flip(),
            },
            RestrictedRoot::Pair {
                i,
                j,
                sign_i,
                sign_j,
            } => RestrictedRoot::Pair {
                i,
                j,
                sign_i: sign_i.flip(),
                sign_j: sign_j.flip(),
            },
        }
    }
}

impl fmt::Display for RestrictedRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RestrictedRoot::Single { l, sign } => match sign {
                Sign::Plus => write!(f, "f{l}"),
                Sign::Minus => write!(f, "-f{l}"),
            },
            RestrictedRoot::Pair {
                i,
                j,
                sign_i,
                sign_j,
            } => {
                match sign_i {
                    Sign::Plus => write!(f, "f{i}")?,
                    Sign::Minus => write!(f, "-f{i}")?,
                }
                match sign_j {
                    Sign::Plus => write!(f, "+f{j}"),
                    Sign::Minus => write!(f, "-f{j}"),
                }
            }
        }
    }
}

/// A restricted root together with its multiplicity and root space.
#[derive(Clone, Debug)]
pub struct RootDatum {
    pub root: RestrictedRoot,
    pub multiplicity: usize,
    pub space: SubalgebraBasis,
}

/// Exact root space `g_alpha = {X : [H, X] = alpha(H) X for all H in a}`,
/// computed as the nullspace of the stacked ad-eigenvalue system over the
/// coordinates of the so(p,q) basis. A functional that is not a root
/// yields an empty basis rather than an error.
pub fn root_space(sig: Signature, root: RestrictedRoot) -> SubalgebraBasis {
    let basis = so_basis(sig);
    root_space_with(sig, root, &basis)
}

fn root_space_with(
    sig: Signature,
    root: RestrictedRoot,
    basis: &SubalgebraBasis,
) -> SubalgebraBasis {
    let n2 = sig.dim() * sig.dim();
    let q = sig.q();
    let d = basis.dim();
    // column k of the system is the stacked flattening over m = 1..q of
    // [H^(m), E_k] - alpha(H^(m)) E_k
    let mut rows = vec![vec![Rational::zero(); d]; q * n2];
    for (k, e) in basis.elements().iter().enumerate() {
        for m in 1..=q {
            let h = gen_h(sig, m);
            let alpha = root.eval(m);
            let lhs = h.bracket(e).matrix().sub(&e.matrix().scale(&alpha));
            let flat = lhs.flatten();
            for idx in 0..n2 {
                let v = flat.get(idx);
                if !v.is_zero() {
                    rows[(m - 1) * n2 + idx][k] = v.clone();
                }
            }
        }
    }
    let system = Matrix::from_rows(rows);
    let kernel = exact::nullspace(&system);
    let elements: Vec<LieElement> = kernel
        .iter()
        .map(|coeffs| basis.combination(coeffs.entries()))
        .collect();
    SubalgebraBasis::assemble(sig, SubalgebraLabel::RootSpace, elements)
}

/// Positive restricted roots in the pinned order: `f_l` ascending by l,
/// then `f_i - f_j`, then `f_i + f_j`, both lexicographic by (i, j).
/// The `f_l` family exists only for p != q.
pub fn positive_roots(sig: Signature) -> Vec<RestrictedRoot> {
    let q = sig.q();
    let mut out = Vec::new();
    if sig.p() != q {
        for l in 1..=q {
            out.push(RestrictedRoot::Single {
                l,
                sign: Sign::Plus,
            });
        }
    }
    for i in 1..=q {
        for j in i + 1..=q {
            out.push(RestrictedRoot::Pair {
                i,
                j,
                sign_i: Sign::Plus,
                sign_j: Sign::Minus,
            });
        }
    }
    for i in 1..=q {
        for j in i + 1..=q {
            out.push(RestrictedRoot::Pair {
                i,
                j,
                sign_i: Sign::Plus,
                sign_j: Sign::Plus,
            });
        }
    }
    out
}

/// All restricted roots with computed root spaces: the positive roots in
/// the pinned order, followed by their negatives.
pub fn restricted_roots(sig: Signature) -> Vec<RootDatum> {
    let basis = so_basis(sig);
    let positives = positive_roots(sig);
    let mut out = Vec::new();
    for root in positives.iter().chain(
        positives
            .iter()
            .map(|r| r.negated())
            .collect::<Vec<_>>()
            .iter(),
    ) {
        let space = root_space_with(sig, *root, &basis);
        out.push(RootDatum {
            root: *root,
            multiplicity: space.dim(),
            space,
        });
    }
    out
}

/// The nilpotent factor n: direct sum of the positive root spaces, of
/// dimension q(p-1); every element is a nilpotent matrix.
pub fn build_n(sig: Signature) -> SubalgebraBasis {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), SubalgebraBasis>>> = OnceLock::new();
    memo(&CACHE, sig, || {
        let basis = so_basis(sig);
        let mut elements = Vec::new();
        for root in positive_roots(sig) {
            let space = root_space_with(sig, root, &basis);
            let expected = match root {
                RestrictedRoot::Single { .. } => sig.p() - sig.q(),
                RestrictedRoot::Pair { .. } => 1,
            };
            assert_eq!(
                space.dim(),
                expected,
                "root space of {root} has unexpected dimension"
            );
            elements.extend(space.elements().iter().cloned());
        }
        assert_eq!(elements.len(), n_dim(sig), "dim n must equal q(p-1)");
        for e in &elements {
            assert!(e.is_nilpotent(), "n contains a non-nilpotent element");
        }
        SubalgebraBasis::assemble(sig, SubalgebraLabel::N, elements)
    })
}

// -- membership in n ---------------------------------------------------------

/// The linear relations every element of n satisfies, in block entries:
/// `A_{k,p-l+1} = B_{k,l}` for k <= p-q (omitted when p = q),
/// `A_{p+1-j,p+1-i} = B_{p+1-j,i}` and `D_{ij} = -B_{p+1-i,j}` for i < j <= q.
pub fn satisfies_n_equations(x: &LieElement) -> bool {
    let sig = x.sig();
    let (p, q) = (sig.p(), sig.q());
    for k in 1..=p - q {
        for l in 1..=q {
            if x.a_entry(k, p - l + 1) != x.b_entry(k, l) {
                return false;
            }
        }
    }
    for i in 1..=q {
        for j in i + 1..=q {
            if x.a_entry(p + 1 - j, p + 1 - i) != x.b_entry(p + 1 - j, i) {
                return false;
            }
            if *x.d_entry(i, j) != -x.b_entry(p + 1 - i, j).clone() {
                return false;
            }
        }
    }
    true
}

/// Membership in n: the defining relations hold and the element lies in
/// the span of the constructed positive root spaces. The relations alone
/// cut out a strictly larger space in general (they also admit k0 and a);
/// [`n_equation_solution_dim`] measures it, and the verification report
/// records the comparison.
pub fn n_membership(x: &LieElement) -> bool {
    let n = build_n(x.sig());
    n_membership_with(x, &n.span_checker())
}

/// Membership against a precomputed span of n (bulk-use variant).
pub fn n_membership_with(x: &LieElement, n_span: &SpanChecker) -> bool {
    satisfies_n_equations(x) && n_span.contains(&x.flatten())
}

/// Dimension of the solution space of the defining relations alone,
/// taken over all of so(p,q) with every unconstrained entry free.
pub fn n_equation_solution_dim(sig: Signature) -> usize {
    let basis = so_basis(sig);
    let (p, q) = (sig.p(), sig.q());
    let mut rows = Vec::new();
    let mut push_row = |f: &dyn Fn(&LieElement) -> Rational| {
        rows.push(basis.elements().iter().map(f).collect::<Vec<_>>());
    };
    for k in 1..=p - q {
        for l in 1..=q {
            push_row(&move |e| e.a_entry(k, p - l + 1) - e.b_entry(k, l));
        }
    }
    for i in 1..=q {
        for j in i + 1..=q {
            push_row(&move |e| e.a_entry(p + 1 - j, p + 1 - i) - e.b_entry(p + 1 - j, i));
            push_row(&move |e| e.d_entry(i, j) + e.b_entry(p + 1 - i, j));
        }
    }
    if rows.is_empty() {
        return basis.dim();
    }
    exact::nullspace(&Matrix::from_rows(rows)).len()
}

// -- group subalgebras -------------------------------------------------------

/// Assembles the Lie algebra of one of the acting groups. For K'AN the
/// caller supplies the k' basis, which must span a subalgebra of k0.
pub fn group_subalgebra(
    sig: Signature,
    label: SubalgebraLabel,
    kprime: Option<&SubalgebraBasis>,
) -> Result<SubalgebraBasis> {
    match label {
        SubalgebraLabel::N => Ok(build_n(sig)),
        SubalgebraLabel::A => Ok(build_a(sig)),
        SubalgebraLabel::K0 => Ok(build_k0(sig)),
        SubalgebraLabel::So => Ok(so_basis(sig)),
        SubalgebraLabel::K => Ok(cartan_decompose(sig).0),
        SubalgebraLabel::An => {
            let mut elements = build_a(sig).elements.clone();
            elements.extend(build_n(sig).elements.iter().cloned());
            Ok(SubalgebraBasis::assemble(
                sig,
                SubalgebraLabel::An,
                elements,
            ))
        }
        SubalgebraLabel::K0An => {
            let mut elements = build_k0(sig).elements.clone();
            elements.extend(build_a(sig).elements.iter().cloned());
            elements.extend(build_n(sig).elements.iter().cloned());
            Ok(SubalgebraBasis::assemble(
                sig,
                SubalgebraLabel::K0An,
                elements,
            ))
        }
        SubalgebraLabel::KPrimeAn => {
            let kprime = kprime
                .ok_or_else(|| Error::InvalidKPrime("selector K'AN requires a k' basis".into()))?;
            if kprime.sig() != sig {
                return Err(Error::InvalidKPrime("signature mismatch".into()));
            }
            let k0 = build_k0(sig);
            let k0_span = k0.span_checker();
            for (idx, e) in kprime.elements().iter().enumerate() {
                if !k0_span.contains(&e.flatten()) {
                    return Err(Error::InvalidKPrime(format!(
                        "element {idx} lies outside k0"
                    )));
                }
            }
            let mut elements = kprime.elements.clone();
            elements.extend(build_a(sig).elements.iter().cloned());
            elements.extend(build_n(sig).elements.iter().cloned());
            SubalgebraBasis::try_new(sig, SubalgebraLabel::KPrimeAn, elements)
                .map_err(|e| Error::InvalidKPrime(format!("k' + a + n is not a subalgebra: {e}")))
        }
        SubalgebraLabel::PCartan => Ok(cartan_decompose(sig).1),
        SubalgebraLabel::RootSpace => Err(Error::BasisInvariant(
            "root spaces are built via root_space(sig, root)".into(),
        )),
    }
}

/// The trivial choice of k' (empty basis).
pub fn trivial_kprime(sig: Signature) -> SubalgebraBasis {
    SubalgebraBasis::assemble(sig, SubalgebraLabel::K0, Vec::new())
}

// -- adapted basis -----------------------------------------------------------

/// Change-of-basis matrix whose columns are `w_1, ..., w_q`, then
/// `e_1, ..., e_{p-q}`, then `e_{p-q+1}+e_{p+q}, ..., e_p+e_{p+1}`.
/// In these coordinates every element of n is strictly upper triangular
/// and every element of a is diagonal `(-c_1..-c_q, 0 x (p-q), c_q..c_1)`.
pub fn adapted_basis(sig: Signature) -> Matrix {
    let (p, q) = (sig.p(), sig.q());
    let dim = sig.dim();
    let mut m = Matrix::zero(dim, dim);
    for i in 1..=q {
        // column i-1 holds w_i = e_{p-i+1} - e_{p+i}
        m.set(p - i, i - 1, Rational::one());
        m.set(p + i - 1, i - 1, -Rational::one());
    }
    for j in 1..=p - q {
        m.set(j - 1, q + j - 1, Rational::one());
    }
    for i in 1..=q {
        // column p+i-1 holds e_{p-q+i} + e_{p+q+1-i}
        m.set(p - q + i - 1, p + i - 1, Rational::one());
        m.set(p + q - i, p + i - 1, Rational::one());
    }
    m
}

/// Conjugates an element into the adapted coordinates: `P^{-1} X P`.
pub fn conjugate_to_adapted(x: &LieElement) -> Matrix {
    let p = adapted_basis(x.sig());
    let p_inv = p.inverse().expect("adapted basis is invertible");
    p_inv.mul(x.matrix()).mul(&p)
}

/// True when every entry on or below the diagonal vanishes.
pub fn is_strictly_upper_triangular(m: &Matrix) -> bool {
    for r in 0..m.rows() {
        for c in 0..=r.min(m.cols() - 1) {
            if !m.get(r, c).is_zero() {
                return false;
            }
        }
    }
    true
}
