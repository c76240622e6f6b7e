//! Exact rational matrices: echelon forms, ranks, null spaces and affine solves.
//!
//! Everything here is exact. Entries are arbitrary-precision rationals; no
//! floating point value is ever produced or consumed.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate {axis} label `{label}`")]
    DuplicateLabel { axis: &'static str, label: String },
    #[error("linear system has no solution")]
    Inconsistent,
    #[error("matrix is singular")]
    Singular,
    #[error("cannot parse `{0}` as a rational number")]
    Parse(String),
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Renders `p/q`, or just `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q`, or a decimal such as `-1.25` or `2.5e-3`, exactly.
pub fn parse_rational(text: &str) -> Result<Rational, LinalgError> {
    let err = || LinalgError::Parse(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| err())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, fraction) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && fraction.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(fraction.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: BigInt = format!("0{whole}{fraction}").parse().map_err(|_| err())?;
    let scale = exponent - fraction.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(all);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // Fall back for ratios whose parts overflow f64 individually.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Dense matrix with labelled rows and columns.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    entries: Vec<Rational>,
}

fn check_unique(axis: &'static str, labels: &[String]) -> Result<(), LinalgError> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(LinalgError::DuplicateLabel { axis, label: l.clone() });
        }
    }
    Ok(())
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

impl RationalMatrix {
    pub fn zeros(row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self, LinalgError> {
        check_unique("row", &row_labels)?;
        check_unique("column", &col_labels)?;
        let (rows, cols) = (row_labels.len(), col_labels.len());
        Ok(Self { rows, cols, row_labels, col_labels, entries: vec![Rational::zero(); rows * cols] })
    }

    pub fn from_rows(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        data: Vec<Vec<Rational>>,
    ) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(row_labels, col_labels)?;
        if data.len() != m.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} rows of data for {} row labels",
                data.len(),
                m.rows
            )));
        }
        for (i, row) in data.into_iter().enumerate() {
            if row.len() != m.cols {
                return Err(LinalgError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    m.cols
                )));
            }
            for (j, x) in row.into_iter().enumerate() {
                m.entries[i * m.cols + j] = x;
            }
        }
        Ok(m)
    }

    /// Unlabelled matrix (labels `r0..`, `c0..`) from integer rows.
    pub fn from_ints(data: &[Vec<i64>]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        let rational = data.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        Self::from_rows(default_labels("r", rows), default_labels("c", cols), rational).expect("rows of equal length")
    }

    pub fn unlabeled(rows: usize, cols: usize) -> Self {
        Self::zeros(default_labels("r", rows), default_labels("c", cols)).expect("generated labels are unique")
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::unlabeled(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn with_labels(mut self, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self, LinalgError> {
        if row_labels.len() != self.rows || col_labels.len() != self.cols {
            return Err(LinalgError::DimensionMismatch("label count differs from dimensions".into()));
        }
        check_unique("row", &row_labels)?;
        check_unique("column", &col_labels)?;
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        Ok(self)
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.row_labels.iter().position(|l| l == label)
    }

    pub fn col_index(&self, label: &str) -> Option<usize> {
        self.col_labels.iter().position(|l| l == label)
    }

    /// Entry looked up by labels.
    pub fn at(&self, row: &str, col: &str) -> Option<&Rational> {
        Some(self.get(self.row_index(row)?, self.col_index(col)?))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self {
            rows: self.cols,
            cols: self.rows,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            entries: vec![Rational::zero(); self.entries.len()],
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        let mut m = self.clone();
        for x in &mut m.entries {
            *x = -x.clone();
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self {
            rows: self.rows,
            cols: other.cols,
            row_labels: self.row_labels.clone(),
            col_labels: other.col_labels.clone(),
            entries: vec![Rational::zero(); self.rows * other.cols],
        };
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `v^T m`.
    pub fn vec_mul(&self, v: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                if !x.is_zero() {
                    *o += vi * x;
                }
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation; keeps this matrix's row labels.
    pub fn hstack(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch("hstack row counts differ".into()));
        }
        let cols = self.cols + other.cols;
        let col_labels = default_labels("c", cols);
        let mut out = Self::zeros(self.row_labels.clone(), col_labels)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(len: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = Self::unlabeled(len, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    /// Reduced row echelon form and its pivot columns. Pivots are taken in
    /// the leftmost column that still has a nonzero entry, using the topmost
    /// such row.
    pub fn rref(&self) -> (Self, Vec<usize>) {
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
            if p != r {
                for j in 0..m.cols {
                    m.entries.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let x = m.get(r, j);
                if !x.is_zero() {
                    let y = x * &inv;
                    m.set(r, j, y);
                }
            }
            let pivot_row: Vec<Rational> = m.row(r).to_vec();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for (j, p) in pivot_row.iter().enumerate().skip(c) {
                    if !p.is_zero() {
                        let y = m.get(i, j) - &f * p;
                        m.set(i, j, y);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : m x = 0}`, one vector per free column of the echelon form.
    pub fn right_nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (k, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(k, f).clone();
                }
                v
            })
            .collect()
    }

    /// Basis of `{y : y^T m = 0}`.
    pub fn left_nullspace(&self) -> Vec<Vec<Rational>> {
        self.transpose().right_nullspace()
    }

    pub fn solve_affine(&self, b: &[Rational]) -> Result<AffineSolution, LinalgError> {
        let mut sols = self.solve_affine_many(&[b.to_vec()])?;
        sols.pop().expect("one right-hand side").ok_or(LinalgError::Inconsistent)
    }

    /// Solves `m x = b` for several right-hand sides with one elimination.
    /// Inconsistent systems come back as `None`.
    pub fn solve_affine_many(&self, rhs: &[Vec<Rational>]) -> Result<Vec<Option<AffineSolution>>, LinalgError> {
        if let Some(b) = rhs.iter().find(|b| b.len() != self.rows) {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let aug = self.hstack(&Self::from_columns(self.rows, rhs))?;
        let (r, all_pivots) = aug.rref();
        let pivots: Vec<usize> = all_pivots.iter().copied().filter(|&p| p < self.cols).collect();
        let homogeneous = self.right_nullspace();
        let out = (0..rhs.len())
            .map(|k| {
                let col = self.cols + k;
                // A pivot-free row with a nonzero entry in this column is 0 = c.
                if (pivots.len()..self.rows).any(|i| !r.get(i, col).is_zero()) {
                    return None;
                }
                let mut x = vec![Rational::zero(); self.cols];
                for (i, &p) in pivots.iter().enumerate() {
                    x[p] = r.get(i, col).clone();
                }
                Some(AffineSolution { particular: x, homogeneous: homogeneous.clone() })
            })
            .collect();
        Ok(out)
    }

    /// Inverse of a square matrix; labels are swapped like a transpose.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let (r, pivots) = self.hstack(&Self::identity(n))?.rref();
        if n > 0 && (pivots.len() < n || pivots[n - 1] >= n) {
            return Err(LinalgError::Singular);
        }
        let mut inv = Self::zeros(self.col_labels.clone(), self.row_labels.clone())?;
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Ok(inv)
    }

    /// Columns selected by index, labels carried along.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let labels = cols.iter().map(|&j| self.col_labels[j].clone()).collect();
        let mut out = Self::zeros(self.row_labels.clone(), labels).expect("selected labels are unique");
        for i in 0..self.rows {
            for (k, &j) in cols.iter().enumerate() {
                out.set(i, k, self.get(i, j).clone());
            }
        }
        out
    }

    /// Equality of dimensions and entries, ignoring labels.
    pub fn same_entries(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.entries == other.entries
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Rows as vectors of strings, for reports.
    pub fn render_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(format_rational).collect()).collect()
    }

    pub fn max_abs_entry(&self) -> Rational {
        self.entries.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
    }
}

/// Solution set `particular + span(homogeneous)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<Rational>,
    pub homogeneous: Vec<Vec<Rational>>,
}

/// Incrementally grown basis kept in reduced echelon form, for repeated
/// independence tests.
#[derive(Debug, Clone, Default)]
pub struct EchelonBasis {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Vec<Rational>) -> Vec<Rational> {
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v.to_vec()).iter().all(Zero::is_zero)
    }

    /// Adds `v` if it is independent of the current span; reports whether it was.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let mut v = self.reduce(v.to_vec());
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].recip();
        for x in &mut v {
            *x *= &inv;
        }
        for (_, row) in &mut self.rows {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, y) in row.iter_mut().zip(&v) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        self.rows.push((p, v));
        true
    }
}

/// Rank of a family of vectors of equal length.
pub fn rank_of_vectors(len: usize, vectors: &[Vec<Rational>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    RationalMatrix::from_columns(len, vectors).rank()
}

/// True iff the two families span the same subspace.
pub fn same_span(len: usize, a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    let ra = rank_of_vectors(len, a);
    let rb = rank_of_vectors(len, b);
    let both: Vec<Vec<Rational>> = a.iter().chain(b).cloned().collect();
    ra == rb && rank_of_vectors(len, &both) == ra
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells = self.render_rows();
        let label_w = self.row_labels.iter().map(String::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..self.cols)
            .map(|j| cells.iter().map(|r| r[j].len()).chain([self.col_labels[j].len()]).max().unwrap_or(1))
            .collect();
        write!(f, "{:label_w$}", "")?;
        for (j, l) in self.col_labels.iter().enumerate() {
            write!(f, "  {:>w$}", l, w = widths[j])?;
        }
        writeln!(f)?;
        for (i, row) in cells.iter().enumerate() {
            write!(f, "{:label_w$}", self.row_labels[i])?;
            for (j, c) in row.iter().enumerate() {
                write!(f, "  {:>w$}", c, w = widths[j])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3_a() -> RationalMatrix {
        RationalMatrix::from_ints(&[
            vec![-1, 1, 0, 0],
            vec![0, -1, 1, 0],
            vec![1, 0, -1, 0],
            vec![-1, 0, 0, 1],
            vec![0, 0, 1, -1],
            vec![0, -1, 0, 1],
        ])
    }

    fn fig3_m() -> RationalMatrix {
        RationalMatrix::from_ints(&[vec![1, 0, 0, -1], vec![0, 0, -1, 1], vec![0, 0, 0, 0], vec![-1, 0, 1, 0]])
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn identity_and_zero_rref() {
        let (r, p) = RationalMatrix::identity(2).rref();
        assert_eq!(r, RationalMatrix::identity(2));
        assert_eq!(p, vec![0, 1]);
        let z = RationalMatrix::unlabeled(3, 3);
        let (r, p) = z.rref();
        assert!(r.is_zero() && p.is_empty());
        assert_eq!(z.rank(), 0);
    }

    #[test]
    fn fig3_incidence_echelon_form() {
        // Row-reduced by hand: every column equals minus the sum of the others,
        // so the echelon form is [I_3 | -1].
        let (r, p) = fig3_a().rref();
        assert_eq!(p, vec![0, 1, 2]);
        let expected = RationalMatrix::from_ints(&[
            vec![1, 0, 0, -1],
            vec![0, 1, 0, -1],
            vec![0, 0, 1, -1],
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 0],
        ]);
        assert_eq!(r, expected);
        assert_eq!(fig3_a().rank(), 3);
    }

    #[test]
    fn fig3_orientation_rank_and_face_sum() {
        let b = RationalMatrix::from_ints(&[
            vec![1, 0, 0, -1, 0, 1],
            vec![0, 1, 0, 0, -1, -1],
            vec![0, 0, 1, 1, 1, 0],
            vec![-1, -1, -1, 0, 0, 0],
        ]);
        assert_eq!(b.rank(), 3);
        let left = b.left_nullspace();
        assert_eq!(left.len(), 1);
        assert!(same_span(4, &left, &[ints(&[1, 1, 1, 1])]));
    }

    #[test]
    fn nullspaces_of_fig3() {
        let a = fig3_a().right_nullspace();
        assert!(same_span(4, &a, &[ints(&[1, 1, 1, 1])]));

        let m = fig3_m();
        let right = m.right_nullspace();
        assert_eq!(right.len(), 2);
        for v in &right {
            assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
        assert!(same_span(4, &right, &[ints(&[1, 1, 1, 1]), ints(&[0, 1, 0, 0])]));

        let left = m.left_nullspace();
        assert!(same_span(4, &left, &[ints(&[0, 0, 1, 0]), ints(&[1, 1, 1, 1])]));
        assert!(RationalMatrix::identity(3).right_nullspace().is_empty());
        assert!(RationalMatrix::identity(3).left_nullspace().is_empty());
    }

    #[test]
    fn affine_solves() {
        let b = vec![frac(1, 2), int(-3)];
        let s = RationalMatrix::identity(2).solve_affine(&b).unwrap();
        assert_eq!(s.particular, b);
        assert!(s.homogeneous.is_empty());

        let s = RationalMatrix::from_ints(&[vec![1, 1]]).solve_affine(&ints(&[1])).unwrap();
        assert_eq!(s.particular, ints(&[1, 0]));
        assert!(same_span(2, &s.homogeneous, &[ints(&[1, -1])]));

        let inconsistent = RationalMatrix::from_ints(&[vec![1, 1], vec![2, 2]]);
        assert_eq!(inconsistent.solve_affine(&ints(&[1, 3])), Err(LinalgError::Inconsistent));
    }

    #[test]
    fn fig3_capacitive_loop_constraint() {
        // With C = 1 the voltage around l3 is the sum of its branch charges:
        // (q3 - q4) + (q3 - q1) + (q3 - q2) = 0, i.e. 3 q3 - q1 - q2 - q4 = 0.
        // Solve for q3 with q1, q2, q4 pinned to generic values.
        let m = RationalMatrix::from_ints(&[vec![-1, -1, 3, -1], vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 0, 1]]);
        let (q1, q2, q4) = (frac(2, 7), int(5), frac(-1, 3));
        let s = m.solve_affine(&[int(0), q1.clone(), q2.clone(), q4.clone()]).unwrap();
        assert_eq!(s.particular[2], (q1 + q2 + q4) / int(3));
    }

    #[test]
    fn inverse_round_trip() {
        let m = RationalMatrix::from_ints(&[vec![2, 1], vec![1, 1]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).unwrap().same_entries(&RationalMatrix::identity(2)));
        assert_eq!(RationalMatrix::from_ints(&[vec![1, 2], vec![2, 4]]).inverse(), Err(LinalgError::Singular));
    }

    #[test]
    fn labels_must_be_unique() {
        let err = RationalMatrix::zeros(vec!["a".into(), "a".into()], vec![]).unwrap_err();
        assert!(matches!(err, LinalgError::DuplicateLabel { .. }));
    }

    #[test]
    fn rational_text_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_rational("-1.25").unwrap(), frac(-5, 4));
        assert_eq!(parse_rational("2.5e-3").unwrap(), frac(1, 400));
        assert_eq!(parse_rational("1E2").unwrap(), int(100));
        assert_eq!(parse_rational(".5").unwrap(), frac(1, 2));
        for bad in ["", "1/0", "abc", "1.2.3", "-", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
        assert_eq!(format_rational(&frac(-2, 4)), "-1/2");
        assert_eq!(format_rational(&int(7)), "7");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_matrix() -> impl Strategy<Value = RationalMatrix> {
            (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
                prop::collection::vec(prop::collection::vec(-3i64..=3, c), r)
                    .prop_map(|rows| RationalMatrix::from_ints(&rows))
            })
        }

        proptest! {
            #[test]
            fn nullspace_dimensions(m in small_matrix()) {
                let rank = m.rank();
                let right = m.right_nullspace();
                let left = m.left_nullspace();
                prop_assert_eq!(right.len(), m.cols() - rank);
                prop_assert_eq!(left.len(), m.rows() - rank);
                for v in &right {
                    prop_assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
                }
                for v in &left {
                    prop_assert!(m.vec_mul(v).unwrap().iter().all(Zero::is_zero));
                }
                prop_assert_eq!(rank_of_vectors(m.cols(), &right), right.len());
            }

            #[test]
            fn rref_is_idempotent(m in small_matrix()) {
                let (r, p) = m.rref();
                let (rr, pp) = r.rref();
                prop_assert_eq!(r, rr);
                prop_assert_eq!(p.clone(), pp);
                prop_assert!(p.windows(2).all(|w| w[0] < w[1]));
            }

            #[test]
            fn rank_equals_transpose_rank(m in small_matrix()) {
                prop_assert_eq!(m.rank(), m.transpose().rank());
            }

            #[test]
            fn affine_solutions_satisfy_system(m in small_matrix(), seed in prop::collection::vec(-4i64..=4, 6)) {
                // b in the column space, so a solution must exist.
                let x0: Vec<Rational> = seed.iter().take(m.cols()).map(|&v| int(v)).collect();
                let b = m.mul_vec(&x0).unwrap();
                let s = m.solve_affine(&b).unwrap();
                prop_assert_eq!(m.mul_vec(&s.particular).unwrap(), b);
                prop_assert_eq!(s.homogeneous.len(), m.cols() - m.rank());
            }
        }
    }
}
