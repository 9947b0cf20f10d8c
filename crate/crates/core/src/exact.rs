//! Exact rational scalars, dense vectors/matrices, and fraction-free rank
//! and nullspace computation.
//!
//! Every dimension claim downstream reduces to a rank decision made here,
//! so the arithmetic is arbitrary-precision rational throughout: no
//! tolerances, no pivot thresholds. Rank uses Bareiss fraction-free
//! elimination over the integers (after clearing denominators row-wise);
//! nullspaces come from rational Gauss-Jordan reduction. The two paths are
//! cross-checked by the rank-nullity tests.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

/// Exact rational scalar in canonical reduced form (positive denominator,
/// coprime numerator/denominator — maintained by every operation).
pub type Rational = num_rational::BigRational;

/// Shorthand for a small rational constant.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for an integer as a rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a rational as `a/b`, or `a` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `a` or `a/b` with optional sign; `b` must be nonzero.
/// Inverse of [`format_rational`]: `parse_rational(&format_rational(x)) == x`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("'{t}' is not an integer")))
    };
    match s.split_once('/') {
        None => {
            if s.contains('.') {
                return Err(Error::Parse(format!(
                    "'{s}' looks like a float; exact inputs take rationals such as 1/2"
                )));
            }
            Ok(Rational::from_integer(parse_int(s)?))
        }
        Some((n, d)) => {
            let denom = parse_int(d)?;
            if denom.is_zero() {
                return Err(Error::Parse(format!("'{s}' has a zero denominator")));
            }
            Ok(Rational::new(parse_int(n)?, denom))
        }
    }
}

/// Dense column vector over the rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Vector {
    entries: Vec<Rational>,
}

impl Vector {
    pub fn new(entries: Vec<Rational>) -> Self {
        Vector { entries }
    }

    pub fn zero(dim: usize) -> Self {
        Vector {
            entries: vec![Rational::zero(); dim],
        }
    }

    /// Standard basis vector with a one in position `idx` (zero-based).
    pub fn unit(dim: usize, idx: usize) -> Self {
        let mut v = Self::zero(dim);
        v.entries[idx] = Rational::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, idx: usize) -> &Rational {
        &self.entries[idx]
    }

    pub fn set(&mut self, idx: usize, value: Rational) {
        self.entries[idx] = value;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Vector {
        Vector::new(self.entries.iter().map(|e| e * c).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.entries
            .iter()
            .map(|e| e.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for e in &self.entries {
            seq.serialize_element(&format_rational(e))?;
        }
        seq.end()
    }
}

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            entries.extend(r);
        }
        Matrix {
            rows: nrows,
            cols: ncols,
            entries,
        }
    }

    /// Convenience constructor from small integers.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat_int(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rational) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> Vector {
        Vector::new(self.entries[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn col(&self, c: usize) -> Vector {
        Vector::new((0..self.rows).map(|r| self.get(r, c).clone()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        let entries = self.entries.iter().map(|e| e * c).collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(r, c) + a * b;
                    out.set(r, c, cur);
                }
            }
        }
        out
    }

    /// `self^k` for a square matrix (small exponents only).
    pub fn pow(&self, k: usize) -> Matrix {
        assert_eq!(self.rows, self.cols);
        let mut out = Matrix::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Flattens row-major into a single vector; used to treat matrices as
    /// points of R^{n*m} for span computations.
    pub fn flatten(&self) -> Vector {
        Vector::new(self.entries.clone())
    }

    /// Exact operator 1-norm: the maximum absolute column sum.
    pub fn one_norm(&self) -> Rational {
        use num_traits::Signed;
        let mut worst = Rational::zero();
        for c in 0..self.cols {
            let mut acc = Rational::zero();
            for r in 0..self.rows {
                acc += self.get(r, c).abs();
            }
            if acc > worst {
                worst = acc;
            }
        }
        worst
    }

    /// Exact determinant by rational Gaussian elimination (square only).
    pub fn determinant(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a.get(r, col).is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                for c in 0..n {
                    let tmp = a.get(pivot, c).clone();
                    a.set(pivot, c, a.get(col, c).clone());
                    a.set(col, c, tmp);
                }
                det = -det;
            }
            let p = a.get(col, col).clone();
            det *= &p;
            for r in col + 1..n {
                let factor = a.get(r, col) / &p;
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = a.get(r, c) - &factor * a.get(col, c);
                    a.set(r, c, v);
                }
            }
        }
        det
    }

    /// Exact inverse, or `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot != col {
                for c in 0..n {
                    let tmp = a.get(pivot, c).clone();
                    a.set(pivot, c, a.get(col, c).clone());
                    a.set(col, c, tmp);
                    let tmp = inv.get(pivot, c).clone();
                    inv.set(pivot, c, inv.get(col, c).clone());
                    inv.set(col, c, tmp);
                }
            }
            let p = a.get(col, col).clone();
            for c in 0..n {
                a.set(col, c, a.get(col, c) / &p);
                inv.set(col, c, inv.get(col, c) / &p);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for c in 0..n {
                    let v = a.get(r, c) - &factor * a.get(col, c);
                    a.set(r, c, v);
                    let v = inv.get(r, c) - &factor * inv.get(col, c);
                    inv.set(r, c, v);
                }
            }
        }
        Some(inv)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        use num_traits::ToPrimitive;
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.get(r, c).to_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let parts: Vec<String> = (0..self.cols)
                .map(|c| format_rational(self.get(r, c)))
                .collect();
            writeln!(f, "[{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| format_rational(self.get(r, c)))
                .collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Exact matrix-vector product.
pub fn matvec(m: &Matrix, v: &Vector) -> Result<Vector> {
    if m.cols() != v.dim() {
        return Err(Error::Shape(format!(
            "matrix is {}x{} but vector has dimension {}",
            m.rows(),
            m.cols(),
            v.dim()
        )));
    }
    let mut out = Vector::zero(m.rows());
    for r in 0..m.rows() {
        let mut acc = Rational::zero();
        for c in 0..m.cols() {
            let a = m.get(r, c);
            if !a.is_zero() {
                acc += a * v.get(c);
            }
        }
        out.set(r, acc);
    }
    Ok(out)
}

/// Clears denominators of one row, returning integer entries.
fn row_to_integers(m: &Matrix, r: usize) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for c in 0..m.cols() {
        lcm = lcm.lcm(m.get(r, c).denom());
    }
    (0..m.cols())
        .map(|c| {
            let e = m.get(r, c);
            e.numer() * (&lcm / e.denom())
        })
        .collect()
}

/// Exact rank over the rationals by Bareiss fraction-free elimination.
///
/// Denominators are cleared row-wise first (rank-preserving), then the
/// one-step Bareiss recurrence keeps every intermediate entry an integer
/// minor of the input, so the interior division is exact. The empty matrix
/// has rank zero.
pub fn rank(m: &Matrix) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let mut a: Vec<Vec<BigInt>> = (0..m.rows()).map(|r| row_to_integers(m, r)).collect();
    let (rows, cols) = (m.rows(), m.cols());
    let mut rank = 0;
    let mut prev = BigInt::one();
    let mut col = 0;
    while rank < rows && col < cols {
        let Some(pivot_row) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            col += 1;
            continue;
        };
        a.swap(rank, pivot_row);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let num = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division must be exact");
                a[r][c] = num / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        col += 1;
    }
    rank
}

/// Reduced row echelon form together with the pivot column indices.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        if pr != r {
            for j in 0..cols {
                let tmp = a.get(pr, j).clone();
                a.set(pr, j, a.get(r, j).clone());
                a.set(r, j, tmp);
            }
        }
        let p = a.get(r, c).clone();
        for j in c..cols {
            a.set(r, j, a.get(r, j) / &p);
        }
        for i in 0..rows {
            if i == r || a.get(i, c).is_zero() {
                continue;
            }
            let factor = a.get(i, c).clone();
            for j in c..cols {
                let v = a.get(i, j) - &factor * a.get(r, j);
                a.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Basis of the exact kernel `{v : Mv = 0}`, of size `cols − rank`.
///
/// Each basis vector sets one free coordinate to one and back-substitutes
/// the pivot coordinates, so the output is canonical and deterministic.
pub fn nullspace(m: &Matrix) -> Vec<Vector> {
    let cols = m.cols();
    if cols == 0 {
        return Vec::new();
    }
    if m.rows() == 0 {
        return (0..cols).map(|c| Vector::unit(cols, c)).collect();
    }
    let (r, pivots) = rref(m);
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = Vector::zero(cols);
        v.set(free, Rational::one());
        for (row, &pc) in pivots.iter().enumerate() {
            v.set(pc, -r.get(row, free).clone());
        }
        basis.push(v);
    }
    debug_assert_eq!(basis.len(), cols - pivots.len());
    basis
}

/// Canonical basis of the row space: the nonzero rows of the RREF.
pub fn row_space_basis(m: &Matrix) -> Vec<Vector> {
    let (r, pivots) = rref(m);
    (0..pivots.len()).map(|i| r.row(i)).collect()
}

/// Incremental span-membership tester over flattened vectors.
///
/// Holds an echelonized copy of the spanning set; `contains` reduces a
/// candidate against it without re-running a full elimination.
pub struct SpanChecker {
    // echelon rows with their leading-column indices, leading entry = 1
    rows: Vec<(usize, Vector)>,
    dim: usize,
}

impl SpanChecker {
    pub fn new(dim: usize, spanning: impl IntoIterator<Item = Vector>) -> Self {
        let mut checker = SpanChecker {
            rows: Vec::new(),
            dim,
        };
        for v in spanning {
            checker.insert(v);
        }
        checker
    }

    /// Number of independent vectors absorbed so far.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Vector) -> Vector {
        for (lead, row) in &self.rows {
            let coeff = v.get(*lead).clone();
            if !coeff.is_zero() {
                v = v.sub(&row.scale(&coeff));
            }
        }
        v
    }

    /// Adds a vector to the span; returns false if it was already inside.
    pub fn insert(&mut self, v: Vector) -> bool {
        assert_eq!(v.dim(), self.dim);
        let red = self.reduce(v);
        let Some(lead) = (0..self.dim).find(|&i| !red.get(i).is_zero()) else {
            return false;
        };
        let inv = Rational::one() / red.get(lead);
        let normalized = red.scale(&inv);
        // keep rows sorted by leading column and back-substitute
        for (_, row) in self.rows.iter_mut() {
            let c = row.get(lead).clone();
            if !c.is_zero() {
                *row = row.sub(&normalized.scale(&c));
            }
        }
        let pos = self.rows.partition_point(|(l, _)| *l < lead);
        self.rows.insert(pos, (lead, normalized));
        true
    }

    pub fn contains(&self, v: &Vector) -> bool {
        self.reduce(v.clone()).is_zero()
    }
}
