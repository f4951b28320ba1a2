use std::fmt;

use dashu_int::IBig;

use super::quad::QuadExt;
use super::rational::{abs, Rational};
use crate::error::{Error, Result};

/// Exact field arithmetic shared by [`Rational`] and [`QuadExt`].
pub trait ExactField: Clone + PartialEq + fmt::Debug {
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Panics when `other` is zero.
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl ExactField for Rational {
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl ExactField for QuadExt {
    fn is_zero(&self) -> bool {
        QuadExt::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        self.field().zero()
    }
    fn one_like(&self) -> Self {
        self.field().one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Dense row-major matrix over an exact field.
#[derive(Clone, PartialEq)]
pub struct MatrixExact<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type MatrixQ = MatrixExact<Rational>;

impl<T: ExactField> MatrixExact<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(MatrixExact {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        MatrixExact {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row = Vec::with_capacity(other.cols);
            for j in 0..other.cols {
                let mut acc = self.get(i, 0).zero_like();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                row.push(acc);
            }
            rows.push(row);
        }
        MatrixExact::from_rows(rows)
    }

    /// Row echelon form by exact elimination; returns the echelon matrix,
    /// the pivot columns and the determinant sign/scale factor accumulated
    /// from row swaps.
    fn echelon(&self) -> (Self, Vec<usize>, bool) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut swapped = false;
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
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
                swapped = !swapped;
            }
            let pivot = m.get(r, c).clone();
            for i in r + 1..m.rows {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let factor = m.get(i, c).div(&pivot);
                for j in c..m.cols {
                    let v = m.get(i, j).sub(&factor.mul(m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots, swapped)
    }

    pub fn rank(&self) -> usize {
        self.echelon().1.len()
    }

    pub fn det(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        if self.rows == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        let (m, pivots, swapped) = self.echelon();
        let zero = self.get(0, 0).zero_like();
        if pivots.len() < self.rows {
            return Ok(zero);
        }
        let mut d = self.get(0, 0).one_like();
        for i in 0..self.rows {
            d = d.mul(m.get(i, i));
        }
        Ok(if swapped { d.neg() } else { d })
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows;
        if n != self.cols || n == 0 {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let zero = self.get(0, 0).zero_like();
        let one = zero.one_like();
        let mut a = self.to_rows();
        let mut inv: Vec<Vec<T>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { one.clone() } else { zero.clone() }).collect())
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&i| !a[i][c].is_zero()).ok_or(Error::Singular)?;
            a.swap(p, c);
            inv.swap(p, c);
            let pivot = a[c][c].clone();
            for j in 0..n {
                a[c][j] = a[c][j].div(&pivot);
                inv[c][j] = inv[c][j].div(&pivot);
            }
            for i in 0..n {
                if i == c || a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].clone();
                for j in 0..n {
                    a[i][j] = a[i][j].sub(&f.mul(&a[c][j]));
                    inv[i][j] = inv[i][j].sub(&f.mul(&inv[c][j]));
                }
            }
        }
        MatrixExact::from_rows(inv)
    }

    /// Row vector `x` with `x · self = target`, when `self` is square and
    /// invertible.
    pub fn solve_left(&self, target: &[T]) -> Result<Vec<T>> {
        let inv = self.inverse()?;
        let row = MatrixExact::from_rows(vec![target.to_vec()])?;
        Ok(row.mul(&inv)?.row(0).to_vec())
    }
}

impl<T: fmt::Debug> fmt::Debug for MatrixExact<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = (0..self.rows).map(|i| &self.data[i * self.cols..(i + 1) * self.cols]).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl MatrixQ {
    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| Rational::from_int((i == j) as i64)).collect())
            .collect();
        MatrixExact::from_rows(rows).expect("square")
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        MatrixExact::from_rows(rows.iter().map(|r| r.iter().map(|&x| Rational::from_int(x)).collect()).collect())
    }

    /// Least common multiple of all entry denominators.
    pub fn common_denominator(&self) -> IBig {
        self.data.iter().fold(IBig::ONE, |acc, x| super::rational::lcm(&acc, &x.denom()))
    }
}

/// Hermite normal form (upper triangular, positive pivots, reduced above)
/// of the row lattice spanned by integer `rows`. Zero rows are dropped.
pub fn hermite_normal_form(rows: &[Vec<IBig>]) -> Vec<Vec<IBig>> {
    let mut m: Vec<Vec<IBig>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        // Euclid on column c among rows r..
        loop {
            let nonzero: Vec<usize> = (r..m.len()).filter(|&i| m[i][c] != IBig::ZERO).collect();
            if nonzero.is_empty() {
                break;
            }
            let p = *nonzero.iter().min_by_key(|&&i| abs(&m[i][c])).expect("nonempty");
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                if m[i][c] == IBig::ZERO {
                    continue;
                }
                let q = floor_div(&m[i][c], &m[r][c]);
                for j in c..cols {
                    let v = &m[i][j] - &q * &m[r][j];
                    m[i][j] = v;
                }
                if m[i][c] != IBig::ZERO {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if m[r][c] == IBig::ZERO {
            continue;
        }
        if m[r][c] < IBig::ZERO {
            for j in c..cols {
                m[r][j] = -m[r][j].clone();
            }
        }
        for i in 0..r {
            let q = floor_div(&m[i][c], &m[r][c]);
            if q != IBig::ZERO {
                for j in c..cols {
                    let v = &m[i][j] - &q * &m[r][j];
                    m[i][j] = v;
                }
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

fn floor_div(a: &IBig, b: &IBig) -> IBig {
    Rational::from_parts(a.clone(), b.clone()).floor()
}

/// Rank of an exact matrix.
pub fn exact_rank<T: ExactField>(m: &MatrixExact<T>) -> usize {
    m.rank()
}
