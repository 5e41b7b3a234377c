//! Exact rational linear algebra.
//!
//! Everything here is exact: ranks and determinants go through fraction-free
//! (Bareiss) elimination on integer-scaled rows, and nullspaces and inverses
//! through Gauss-Jordan elimination over the rationals. There is no floating
//! point path in this module.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix has rank {rank}, expected full row rank {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational, LinAlgError> {
    let t = s.trim();
    let r = Rational::from_str(t).map_err(|_| LinAlgError::Parse(s.to_string()))?;
    Ok(r)
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter: a single rational as a string.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: a list of rationals as strings.
pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(format_rational).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinAlgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinAlgError::Dimension("ragged rows".into()));
        }
        Ok(ExactMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Convenience constructor from integer rows. Panics on ragged input.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let rows: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect();
        Self::from_rows(rows).expect("ragged rows")
    }

    /// Parses a grid of `"p/q"` strings.
    pub fn from_strings(rows: &[Vec<String>]) -> Result<Self, LinAlgError> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(parsed)
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(format_rational).collect()).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<Self, LinAlgError> {
        if self.cols != other.rows {
            return Err(LinAlgError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Rational::zero();
                for l in 0..self.cols {
                    let a = self.get(i, l);
                    if !a.is_zero() {
                        acc += a * other.get(l, j);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Submatrix with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    pub fn stack(&self, other: &ExactMatrix) -> Result<Self, LinAlgError> {
        if self.cols != other.cols && self.rows > 0 && other.rows > 0 {
            return Err(LinAlgError::Dimension("column counts differ".into()));
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(ExactMatrix { rows: self.rows + other.rows, cols, data })
    }

    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| integer_scaled(self.row(i)).0).collect()
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        bareiss(self.integer_rows(), self.cols).rank
    }

    /// Exact determinant of a square matrix.
    pub fn determinant(&self) -> Result<Rational, LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::Dimension(format!("determinant of {}x{} matrix", self.rows, self.cols)));
        }
        if self.rows == 0 {
            return Ok(Rational::one());
        }
        let mut scale = BigInt::one();
        let mut rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let (r, s) = integer_scaled(self.row(i));
            scale *= s;
            rows.push(r);
        }
        let e = bareiss(rows, self.cols);
        if e.rank < self.rows {
            return Ok(Rational::zero());
        }
        let det = if e.negate { -e.last_pivot } else { e.last_pivot };
        Ok(Rational::new(det, scale))
    }

    /// Determinant of the square submatrix on `row_idx x col_idx`. Both
    /// index lists must be strictly increasing and of equal length.
    pub fn minor(&self, row_idx: &[usize], col_idx: &[usize]) -> Result<Rational, LinAlgError> {
        if row_idx.len() != col_idx.len() {
            return Err(LinAlgError::Dimension(format!(
                "minor with {} rows and {} columns",
                row_idx.len(),
                col_idx.len()
            )));
        }
        check_increasing(row_idx, self.rows, "row")?;
        check_increasing(col_idx, self.cols, "column")?;
        self.select(row_idx, col_idx).determinant()
    }

    /// Maximal minor on all rows and the given increasing columns.
    pub fn maximal_minor(&self, col_idx: &[usize]) -> Result<Rational, LinAlgError> {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.minor(&rows, col_idx)
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(p, r);
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = m.get(i, j) - &f * m.get(r, j);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Rows forming a basis of `{v : self * v = 0}`.
    pub fn nullspace_basis(&self) -> ExactMatrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = ExactMatrix::zeros(free.len(), self.cols);
        for (row, &f) in free.iter().enumerate() {
            out.set(row, f, Rational::one());
            for (pi, &pc) in pivots.iter().enumerate() {
                out.set(row, pc, -r.get(pi, f).clone());
            }
        }
        out
    }

    /// A basis of the row space, as the nonzero rows of the RREF.
    pub fn row_space_basis(&self) -> ExactMatrix {
        let (r, pivots) = self.rref();
        let idx: Vec<usize> = (0..pivots.len()).collect();
        let cols: Vec<usize> = (0..self.cols).collect();
        r.select(&idx, &cols)
    }

    pub fn inverse(&self) -> Result<ExactMatrix, LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = ExactMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Rational::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(LinAlgError::Singular);
        }
        let rows: Vec<usize> = (0..n).collect();
        let cols: Vec<usize> = (n..2 * n).collect();
        Ok(r.select(&rows, &cols))
    }

    /// Invertible square matrix whose first rows are `self`, completed by
    /// standard basis vectors taken greedily in index order.
    pub fn complete_to_square(&self) -> Result<ExactMatrix, LinAlgError> {
        let rank = self.rank();
        if rank != self.rows {
            return Err(LinAlgError::RankDeficient { rank, expected: self.rows });
        }
        let mut out = self.clone();
        let mut current = rank;
        for i in 0..self.cols {
            if current == self.cols {
                break;
            }
            let mut e = ExactMatrix::zeros(1, self.cols);
            e.set(0, i, Rational::one());
            let candidate = out.stack(&e)?;
            if candidate.rank() > current {
                out = candidate;
                current += 1;
            }
        }
        Ok(out)
    }

    /// Exact rank of the column submatrix on `cols`.
    pub fn column_rank(&self, cols: &[usize]) -> usize {
        self.select_columns(cols).rank()
    }
}

fn check_increasing(idx: &[usize], bound: usize, what: &str) -> Result<(), LinAlgError> {
    if idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&i| i >= bound) {
        return Err(LinAlgError::Dimension(format!("{what} indices {idx:?} not strictly increasing within 0..{bound}")));
    }
    Ok(())
}

/// Scales a rational vector to integers by the lcm of its denominators.
/// Returns the integer vector and the scale factor.
pub(crate) fn integer_scaled(v: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let out = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    (out, l)
}

pub(crate) struct Elimination {
    pub rank: usize,
    pub last_pivot: BigInt,
    pub negate: bool,
}

/// Fraction-free row echelon reduction. Every intermediate entry is a minor
/// of the input, so the divisions are exact.
pub(crate) fn bareiss(mut a: Vec<Vec<BigInt>>, cols: usize) -> Elimination {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut negate = false;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            a.swap(p, r);
            negate = !negate;
        }
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let f = row[c].clone();
            for j in c + 1..cols {
                let v = &row[j] * &pivot_row[c] - &f * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    Elimination { rank: r, last_pivot: prev, negate }
}

/// Rank of a set of integer column vectors, each of length `dim`.
pub(crate) fn integer_column_rank(columns: &[&[BigInt]], dim: usize) -> usize {
    if columns.is_empty() {
        return 0;
    }
    // rank of the transpose: one row per column vector
    let rows: Vec<Vec<BigInt>> = columns.iter().map(|c| c.to_vec()).collect();
    bareiss(rows, dim).rank
}

/// True iff `a` and `b` are nonzero multiples of one another.
pub fn proportional(a: &[Rational], b: &[Rational]) -> bool {
    let Some(i) = a.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    if b[i].is_zero() {
        return false;
    }
    let f = &b[i] / &a[i];
    a.iter().zip(b).all(|(x, y)| &(x * &f) == y)
}

pub fn sign(r: &Rational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1_b() -> ExactMatrix {
        ExactMatrix::from_i64(&[&[1, 1, 1, 0], &[0, -1, -2, 1]])
    }

    fn cofactor_det(m: &ExactMatrix) -> Rational {
        let n = m.rows();
        if n == 0 {
            return Rational::one();
        }
        let mut acc = Rational::zero();
        for j in 0..n {
            let rows: Vec<usize> = (1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let sub = cofactor_det(&m.select(&rows, &cols));
            let term = m.get(0, j) * sub;
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn rank_examples() {
        assert_eq!(ExactMatrix::identity(2).rank(), 2);
        assert_eq!(ExactMatrix::zeros(3, 4).rank(), 0);
        assert_eq!(example1_b().rank(), 2);
    }

    #[test]
    fn minor_examples() {
        let id = ExactMatrix::identity(4);
        assert_eq!(id.minor(&[0, 1], &[0, 1]).unwrap(), rat(1));
        let b = example1_b();
        assert_eq!(b.maximal_minor(&[0, 3]).unwrap(), rat(1));
        assert_eq!(b.maximal_minor(&[0, 1]).unwrap(), rat(-1));
        assert!(matches!(b.minor(&[0, 1], &[0]), Err(LinAlgError::Dimension(_))));
        assert!(matches!(b.minor(&[1, 0], &[0, 1]), Err(LinAlgError::Dimension(_))));
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(ExactMatrix::identity(3).nullspace_basis().rows(), 0);
        let m = ExactMatrix::from_i64(&[&[1, -1]]);
        let ns = m.nullspace_basis();
        assert_eq!(ns.rows(), 1);
        assert!(proportional(ns.row(0), &[rat(1), rat(1)]));
        let b = example1_b();
        let ns = b.nullspace_basis();
        assert_eq!(ns.rows(), 2);
        assert!(b.mul(&ns.transpose()).unwrap().is_zero());
    }

    #[test]
    fn completion_examples() {
        let m = ExactMatrix::from_i64(&[&[1, 0]]);
        assert_eq!(m.complete_to_square().unwrap(), ExactMatrix::identity(2));
        let b = example1_b();
        let full = b.complete_to_square().unwrap();
        assert_eq!(full.rows(), 4);
        assert_eq!(full.select(&[0, 1], &[0, 1, 2, 3]), b);
        assert!(!full.determinant().unwrap().is_zero());
        let sq = ExactMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        assert_eq!(sq.complete_to_square().unwrap(), sq);
        let deficient = ExactMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert!(matches!(deficient.complete_to_square(), Err(LinAlgError::RankDeficient { .. })));
    }

    #[test]
    fn inverse_and_parse() {
        let m = ExactMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), ExactMatrix::identity(2));
        assert_eq!(parse_rational(" -3/6 ").unwrap(), ratio(-1, 2));
        assert_eq!(format_rational(&ratio(4, 2)), "2");
        assert_eq!(format_rational(&ratio(-1, 3)), "-1/3");
        assert!(parse_rational("x").is_err());
        assert!(matches!(ExactMatrix::from_i64(&[&[1, 2], &[2, 4]]).inverse(), Err(LinAlgError::Singular)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_matrix(max: usize) -> impl Strategy<Value = ExactMatrix> {
            (1..=max, 1..=max).prop_flat_map(|(r, c)| {
                proptest::collection::vec((-4i64..=4, 1i64..=3), r * c).prop_map(move |v| {
                    let rows = (0..r)
                        .map(|i| (0..c).map(|j| ratio(v[i * c + j].0, v[i * c + j].1)).collect())
                        .collect();
                    ExactMatrix::from_rows(rows).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn determinant_matches_cofactor(n in 1usize..=5, seed in proptest::collection::vec(-5i64..=5, 25)) {
                let rows: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| ratio(seed[i * 5 + j], 1 + (i as i64 + j as i64) % 3)).collect()).collect();
                let m = ExactMatrix::from_rows(rows).unwrap();
                let all: Vec<usize> = (0..n).collect();
                prop_assert_eq!(m.minor(&all, &all).unwrap(), cofactor_det(&m));
            }

            #[test]
            fn nullspace_is_annihilated(m in small_matrix(5)) {
                let ns = m.nullspace_basis();
                prop_assert_eq!(m.rank() + ns.rows(), m.cols());
                if ns.rows() > 0 {
                    prop_assert!(m.mul(&ns.transpose()).unwrap().is_zero());
                }
            }
        }
    }
}
