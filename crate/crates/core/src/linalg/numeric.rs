//! Numeric kernels over [`Complex`] at a configurable binary precision.

use std::cmp::Ordering;

use super::quad::QuadExt;
use super::rational::Rational;
use super::real::{Complex, Real};
use crate::error::{Error, Result};

/// Dense complex matrix, row-major.
#[derive(Clone, Debug)]
pub struct MatrixAP {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl MatrixAP {
    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(MatrixAP {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(rows: usize, cols: usize, prec: usize) -> Self {
        MatrixAP {
            rows,
            cols,
            data: vec![Complex::zero(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: usize) -> Self {
        let mut m = MatrixAP::zeros(n, n, prec);
        for i in 0..n {
            m.set(i, i, Complex::one(prec));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Complex {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex) {
        self.data[i * self.cols + j] = v;
    }

    pub fn precision(&self) -> usize {
        self.data.iter().map(Complex::precision).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &MatrixAP) -> Result<MatrixAP> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let prec = self.precision().max(other.precision());
        let mut out = MatrixAP::zeros(self.rows, other.cols, prec);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Complex::zero(prec);
                for k in 0..self.cols {
                    acc = &acc + &(self.get(i, k) * other.get(k, j));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch("matrix-vector length".into()));
        }
        let prec = self.precision();
        Ok((0..self.rows)
            .map(|i| (0..self.cols).fold(Complex::zero(prec), |acc, k| &acc + &(self.get(i, k) * &v[k])))
            .collect())
    }

    pub fn sub(&self, other: &MatrixAP) -> Result<MatrixAP> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("difference of unequal shapes".into()));
        }
        Ok(MatrixAP {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> Real {
        let prec = self.precision();
        self.data.iter().map(Complex::abs).fold(Real::zero(prec), Real::max)
    }

    /// Determinant by elimination with partial pivoting.
    pub fn det(&self) -> Result<Complex> {
        if self.rows != self.cols || self.rows == 0 {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let prec = self.precision();
        let mut a: Vec<Vec<Complex>> = (0..n).map(|i| self.data[i * n..(i + 1) * n].to_vec()).collect();
        let mut det = Complex::one(prec);
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[i][c].norm_sqr().cmp_total(&a[j][c].norm_sqr()))
                .expect("nonempty");
            if a[p][c].is_zero() {
                return Ok(Complex::zero(prec));
            }
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            let pivot = a[c][c].clone();
            det = &det * &pivot;
            let inv = pivot.recip();
            for i in c + 1..n {
                let f = &a[i][c] * &inv;
                for j in c..n {
                    let v = &a[i][j] - &(&f * &a[c][j]);
                    a[i][j] = v;
                }
            }
        }
        Ok(det)
    }
}

/// Result of a one-sided Jacobi SVD: singular values and right singular
/// vectors (columns of a unitary matrix, stored as vectors).
#[derive(Clone, Debug)]
pub struct Svd {
    pub singular_values: Vec<Real>,
    pub right_vectors: Vec<Vec<Complex>>,
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. Works column-wise, so wide matrices
/// are handled directly.
pub fn svd(m: &MatrixAP) -> Result<Svd> {
    let prec = m.precision().max(64);
    let n = m.cols();
    let rows = m.rows();
    let mut cols: Vec<Vec<Complex>> = (0..n)
        .map(|j| (0..rows).map(|i| m.get(i, j).with_precision(prec)).collect())
        .collect();
    let mut v: Vec<Vec<Complex>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { Complex::one(prec) } else { Complex::zero(prec) })
                .collect()
        })
        .collect();
    let eps = Real::pow2_neg(prec.saturating_sub(16), prec);

    let inner =
        |a: &[Complex], b: &[Complex]| -> Complex { a.iter().zip(b).fold(Complex::zero(prec), |acc, (x, y)| &acc + &(&x.conj() * y)) };
    let norm2 = |a: &[Complex]| -> Real { a.iter().fold(Real::zero(prec), |acc, x| acc + x.norm_sqr()) };

    // Columns below this squared norm are rounding noise of a dependent
    // column and are left alone.
    let total = cols.iter().fold(Real::zero(prec), |acc, c| acc + norm2(c));
    let negligible = &total * &eps.square();

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm2(&cols[p]);
                let beta = norm2(&cols[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = inner(&cols[p], &cols[q]);
                let g_abs = gamma.abs();
                if g_abs <= &eps * &(&alpha * &beta).sqrt() {
                    continue;
                }
                rotated = true;
                // e^{-iφ} aligns column q so that the inner product is real.
                let phase = gamma.conj().scale(&g_abs.recip());
                let zeta = (&beta - &alpha) / (Real::from_int(2, prec) * &g_abs);
                let one = Real::one(prec);
                let t_abs = one.clone() / (zeta.abs() + (&one + zeta.square()).sqrt());
                let t = if zeta.is_negative() { -t_abs } else { t_abs };
                let c = (&one + t.square()).sqrt().recip();
                let s = &c * &t;
                for vecs in [&mut cols, &mut v] {
                    let len = vecs[p].len();
                    for k in 0..len {
                        let xp = vecs[p][k].clone();
                        let xq = &vecs[q][k] * &phase;
                        vecs[p][k] = &xp.scale(&c) - &xq.scale(&s);
                        vecs[q][k] = &xp.scale(&s) + &xq.scale(&c);
                    }
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { precision: prec });
    }
    Ok(Svd {
        singular_values: cols.iter().map(|c| norm2(c).sqrt()).collect(),
        right_vectors: v,
    })
}

/// Orthonormal basis of the right nullspace. A singular value σ counts as
/// zero iff σ < tol·σ_max, and all count as zero when σ_max < tol.
pub fn numeric_nullspace(m: &MatrixAP, tol: &Rational) -> Result<Vec<Vec<Complex>>> {
    assert!(tol.is_positive(), "tolerance must be positive");
    let dec = svd(m)?;
    let prec = m.precision().max(64);
    let tol = Real::from_rational(tol, prec);
    let sigma_max = dec.singular_values.iter().cloned().fold(Real::zero(prec), Real::max);
    let all_zero = sigma_max < tol;
    let cutoff = &tol * &sigma_max;
    Ok(dec
        .singular_values
        .iter()
        .zip(dec.right_vectors)
        .filter(|(s, _)| all_zero || **s < cutoff)
        .map(|(_, v)| v)
        .collect())
}

/// Numeric rank under the same threshold as [`numeric_nullspace`].
pub fn numeric_rank(m: &MatrixAP, tol: &Rational) -> Result<usize> {
    Ok(m.cols() - numeric_nullspace(m, tol)?.len())
}

/// Solves the square real system `a · x = b` by elimination with partial
/// pivoting.
pub fn solve_real(a: &[Vec<Real>], b: &[Real]) -> Result<Vec<Real>> {
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) || b.len() != n {
        return Err(Error::DimensionMismatch("square system expected".into()));
    }
    let mut m: Vec<Vec<Real>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().cmp_total(&m[j][c].abs())).expect("nonempty");
        if m[p][c].is_zero() {
            return Err(Error::Singular);
        }
        m.swap(p, c);
        for i in c + 1..n {
            let f = &m[i][c] / &m[c][c];
            for j in c..=n {
                let v = &m[i][j] - &(&f * &m[c][j]);
                m[i][j] = v;
            }
        }
    }
    let mut x = vec![Real::zero(m[0][0].precision()); n];
    for i in (0..n).rev() {
        let mut acc = m[i][n].clone();
        for j in i + 1..n {
            acc = acc - &m[i][j] * &x[j];
        }
        x[i] = acc / &m[i][i];
    }
    Ok(x)
}

/// Both roots of `c2·T² + c1·T + c0` with exact coefficients in Q(√a).
/// Roots are ordered by decreasing imaginary part, then decreasing real
/// part.
pub fn solve_quadratic(c2: &QuadExt, c1: &QuadExt, c0: &QuadExt, prec: usize) -> (Complex, Complex) {
    assert!(!c2.is_zero(), "leading coefficient must be nonzero");
    let sqrt_a = Real::from_rational(c2.radicand(), prec).sqrt();
    let four = c2.field().rational(Rational::from_int(4));
    let disc = c1 * c1 - &(&four * &(c2 * c0));
    let a = c2.to_real(&sqrt_a);
    let b = c1.to_real(&sqrt_a);
    let c = c0.to_real(&sqrt_a);
    let two_a = Real::from_int(2, prec) * &a;
    match disc.signum() {
        Ordering::Less => {
            let root = (-disc).to_real(&sqrt_a).sqrt();
            let re = -(&b / &two_a);
            let im = (root / &two_a).abs();
            (Complex::new(re.clone(), im.clone()), Complex::new(re, -im))
        }
        _ => {
            let root = disc.to_real(&sqrt_a).sqrt();
            // q = -(b + sign(b)·√disc)/2 avoids cancellation.
            let q = if b.is_negative() {
                -(&b - &root) / Real::from_int(2, prec)
            } else {
                -(&b + &root) / Real::from_int(2, prec)
            };
            let (r1, r2) = if q.is_zero() {
                (Real::zero(prec), Real::zero(prec))
            } else {
                (&q / &a, &c / &q)
            };
            let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
            (Complex::from_real(hi), Complex::from_real(lo))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::quad::QuadField;
    use crate::linalg::real::DEFAULT_PRECISION as P;

    fn c(re: i64, im: i64) -> Complex {
        Complex::from_rationals(&Rational::from_int(re), &Rational::from_int(im), P)
    }

    fn tol() -> Rational {
        "1e-10".parse().unwrap()
    }

    fn small(x: &Real, bits: usize) -> bool {
        x.abs() < Real::pow2_neg(bits, P)
    }

    #[test]
    fn nullspace_of_identity_is_empty() {
        let m = MatrixAP::identity(2, P);
        assert!(numeric_nullspace(&m, &tol()).unwrap().is_empty());
    }

    #[test]
    fn nullspace_of_zero_is_everything() {
        let m = MatrixAP::zeros(2, 2, P);
        assert_eq!(numeric_nullspace(&m, &tol()).unwrap().len(), 2);
    }

    #[test]
    fn nullspace_of_rank_one_complex() {
        // Oracle by row reduction: row 2 = i·row 1, so the kernel is
        // v1 + i v2 = 0, i.e. spanned by (-i, 1).
        let m = MatrixAP::from_rows(vec![vec![c(1, 0), c(0, 1)], vec![c(0, 1), c(-1, 0)]]).unwrap();
        let ns = numeric_nullspace(&m, &tol()).unwrap();
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        let expected = [c(0, -1), c(1, 0)];
        // proportional up to phase: v[0]·e[1] − v[1]·e[0] = 0
        let cross = &(&v[0] * &expected[1]) - &(&v[1] * &expected[0]);
        assert!(small(&cross.abs(), 100));
        let nrm = v[0].norm_sqr() + v[1].norm_sqr();
        assert!(small(&(nrm - Real::one(P)), 100));
        let image = m.mul_vec(v).unwrap();
        assert!(image.iter().all(|x| small(&x.abs(), 100)));
    }

    #[test]
    fn svd_orthogonalizes_columns() {
        let m = MatrixAP::from_rows(vec![vec![c(1, 2), c(3, 0), c(0, 1)], vec![c(-1, 1), c(2, -2), c(5, 0)]]).unwrap();
        let dec = svd(&m).unwrap();
        assert_eq!(dec.singular_values.iter().filter(|s| small(s, 100)).count(), 1);
        // V is unitary
        for i in 0..3 {
            for j in 0..3 {
                let ip = dec.right_vectors[i]
                    .iter()
                    .zip(&dec.right_vectors[j])
                    .fold(Complex::zero(P), |acc, (x, y)| &acc + &(&x.conj() * y));
                let target = if i == j { Complex::one(P) } else { Complex::zero(P) };
                assert!(small(&(&ip - &target).abs(), 100));
            }
        }
    }

    #[test]
    fn determinant_with_pivoting() {
        let m = MatrixAP::from_rows(vec![vec![c(0, 0), c(1, 0)], vec![c(0, 1), c(2, 0)]]).unwrap();
        let d = m.det().unwrap();
        assert!(small(&(&d - &c(0, -1)).abs(), 100));
    }

    #[test]
    fn solve_real_system() {
        let r = |x: i64| Real::from_int(x, P);
        let x = solve_real(&[vec![r(0), r(2)], vec![r(3), r(1)]], &[r(4), r(5)]).unwrap();
        assert!(small(&(&x[0] - &r(1)), 100));
        assert!(small(&(&x[1] - &r(2)), 100));
        assert_eq!(
            solve_real(&[vec![r(1), r(2)], vec![r(2), r(4)]], &[r(1), r(1)]),
            Err(Error::Singular)
        );
    }

    fn close(z: &Complex, re: &Real, im: &Real) -> bool {
        small(&(&z.re - re), 110) && small(&(&z.im - im), 110)
    }

    #[test]
    fn quadratic_examples() {
        let f = QuadField::new(Rational::from_int(3)).unwrap();
        let q = |x: i64| f.rational(Rational::from_int(x));
        let zero = Real::zero(P);
        let one = Real::one(P);

        let (r1, r2) = solve_quadratic(&q(1), &q(0), &q(1), P);
        assert!(close(&r1, &zero, &one));
        assert!(close(&r2, &zero, &-one.clone()));

        // T² − √3 T + 1: oracle (√3 ± i)/2 from the quadratic formula
        let (r1, r2) = solve_quadratic(&q(1), &-f.sqrt(), &q(1), P);
        let half_sqrt3 = Real::from_int(3, P).sqrt() / Real::from_int(2, P);
        let half = Real::from_rational(&Rational::new(1, 2), P);
        assert!(close(&r1, &half_sqrt3, &half));
        assert!(close(&r2, &half_sqrt3, &-half.clone()));

        let (r1, r2) = solve_quadratic(&q(2), &q(0), &q(-8), P);
        assert!(close(&r1, &Real::from_int(2, P), &zero));
        assert!(close(&r2, &Real::from_int(-2, P), &zero));
    }

    proptest::proptest! {
        #[test]
        fn quadratic_residual_is_tiny(c2 in proptest::prop_oneof![-9i64..=-1, 1i64..=9],
                                      c1u in -9i64..=9, c1v in -9i64..=9, c0u in -9i64..=9, c0v in -9i64..=9) {
            let f = QuadField::new(Rational::from_int(5)).unwrap();
            let a = f.rational(Rational::from_int(c2));
            let b = f.elem(Rational::from_int(c1u), Rational::from_int(c1v));
            let c0 = f.elem(Rational::from_int(c0u), Rational::from_int(c0v));
            let (r1, r2) = solve_quadratic(&a, &b, &c0, P);
            let sqrt5 = Real::from_int(5, P).sqrt();
            let (an, bn, cn) = (Complex::from_real(a.to_real(&sqrt5)), Complex::from_real(b.to_real(&sqrt5)), Complex::from_real(c0.to_real(&sqrt5)));
            for r in [&r1, &r2] {
                let val = &(&(&an * &(r * r)) + &(&bn * r)) + &cn;
                proptest::prop_assert!(val.abs() < Real::pow2_neg(P / 2, P));
            }
            proptest::prop_assert!(r1.im >= r2.im);
        }

        #[test]
        fn rank_plus_nullity(entries in proptest::collection::vec(-5i64..=5, 24), rows in 1usize..=3, cols in 1usize..=4) {
            let m = MatrixAP::from_rows((0..rows).map(|i| (0..cols).map(|j| c(entries[2 * (i * 4 + j)], entries[2 * (i * 4 + j) + 1])).collect()).collect()).unwrap();
            let tol: Rational = "1e-20".parse().unwrap();
            let ns = numeric_nullspace(&m, &tol).unwrap();
            let rank = numeric_rank(&m, &tol).unwrap();
            proptest::prop_assert_eq!(rank + ns.len(), cols);
            for v in &ns {
                let img = m.mul_vec(v).unwrap();
                proptest::prop_assert!(img.iter().all(|x| x.abs() < Real::pow2_neg(80, P)));
            }
        }
    }
}
