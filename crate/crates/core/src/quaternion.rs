//! The quaternion algebra `B = (a, b / Q)` with basis `1, x, y, xy`,
//! `x² = a`, `y² = b`, `xy = −yx`, and its fixed embedding into 2×2 real
//! matrices over `Q(√a)`.

use std::collections::BTreeSet;
use std::fmt;

use dashu_int::IBig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Complex, QuadExt, QuadField, Rational, Real};

/// Parameters `a > 0`, `b < 0` with `a` not a rational square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraParams {
    a: Rational,
    b: Rational,
    field: QuadField,
}

impl AlgebraParams {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        if !a.is_positive() {
            return Err(Error::InvalidAlgebra(format!("a = {a} must be positive")));
        }
        if !b.is_negative() {
            return Err(Error::InvalidAlgebra(format!("b = {b} must be negative")));
        }
        if a.is_square() {
            return Err(Error::InvalidAlgebra(format!("a = {a} is a rational square, so B is split")));
        }
        let field = QuadField::new(a.clone())?;
        Ok(AlgebraParams { a, b, field })
    }

    pub fn from_ints(a: i64, b: i64) -> Result<Self> {
        AlgebraParams::new(Rational::from_int(a), Rational::from_int(b))
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    /// The field `Q(√a)` holding the matrix entries of the embedding.
    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn mul(&self, p: &QuatElement, q: &QuatElement) -> QuatElement {
        let (a, b) = (&self.a, &self.b);
        let ab = a * b;
        QuatElement {
            k: &p.k * &q.k + a * &p.l * &q.l + b * &p.m * &q.m - &ab * &p.n * &q.n,
            l: &p.k * &q.l + &p.l * &q.k - b * &p.m * &q.n + b * &p.n * &q.m,
            m: &p.k * &q.m + &p.m * &q.k + a * &p.l * &q.n - a * &p.n * &q.l,
            n: &p.k * &q.n + &p.n * &q.k + &p.l * &q.m - &p.m * &q.l,
        }
    }

    /// Reduced norm `k² − a·l² − b·m² + a·b·n²`.
    pub fn nrd(&self, q: &QuatElement) -> Rational {
        let (a, b) = (&self.a, &self.b);
        &q.k * &q.k - a * &q.l * &q.l - b * &q.m * &q.m + a * b * &q.n * &q.n
    }

    /// `q⁻¹ = q′ / nrd(q)`; `None` for zero.
    pub fn inverse(&self, q: &QuatElement) -> Option<QuatElement> {
        let n = self.nrd(q);
        (!n.is_zero()).then(|| q.conj().scale(&n.recip()))
    }

    /// The fixed embedding `x ↦ diag(√a, −√a)`, `y ↦ [[0, b], [1, 0]]`.
    pub fn embed(&self, q: &QuatElement) -> Mat2Quad {
        let f = &self.field;
        Mat2Quad([
            [f.elem(q.k.clone(), q.l.clone()), f.elem(&self.b * &q.m, &self.b * &q.n)],
            [f.elem(q.m.clone(), -&q.n), f.elem(q.k.clone(), -&q.l)],
        ])
    }

    pub fn is_indefinite_division(&self) -> bool {
        is_indefinite_division(&self.a, &self.b)
    }

    pub fn ramified_primes(&self) -> BTreeSet<u64> {
        ramified_primes(&self.a, &self.b)
    }

    /// Product of the finite ramified primes.
    pub fn discriminant(&self) -> IBig {
        self.ramified_primes().iter().fold(IBig::ONE, |acc, &p| acc * IBig::from(p))
    }

    /// `√a` at the given precision, for numeric evaluation of embedded
    /// matrices.
    pub fn numeric(&self, prec: usize) -> NumericAlgebra {
        NumericAlgebra {
            params: self.clone(),
            sqrt_a: Real::from_rational(&self.a, prec).sqrt(),
        }
    }
}

impl fmt::Display for AlgebraParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {} / Q)", self.a, self.b)
    }
}

/// Numeric view of the embedding at a fixed precision.
#[derive(Clone, Debug)]
pub struct NumericAlgebra {
    pub params: AlgebraParams,
    sqrt_a: Real,
}

impl NumericAlgebra {
    pub fn precision(&self) -> usize {
        self.sqrt_a.precision()
    }

    pub fn real(&self, x: &QuadExt) -> Real {
        x.to_real(&self.sqrt_a)
    }

    pub fn matrix(&self, q: &QuatElement) -> [[Real; 2]; 2] {
        let m = self.params.embed(q);
        [
            [self.real(&m.0[0][0]), self.real(&m.0[0][1])],
            [self.real(&m.0[1][0]), self.real(&m.0[1][1])],
        ]
    }

    /// `embed(q) · (τ, 1)ᵗ`.
    pub fn apply(&self, q: &QuatElement, tau: &Complex) -> [Complex; 2] {
        let m = self.matrix(q);
        [
            &tau.scale(&m[0][0]) + &Complex::from_real(m[0][1].clone()),
            &tau.scale(&m[1][0]) + &Complex::from_real(m[1][1].clone()),
        ]
    }
}

/// `k + l·x + m·y + n·xy` with rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[String; 4]", try_from = "[String; 4]")]
pub struct QuatElement {
    pub k: Rational,
    pub l: Rational,
    pub m: Rational,
    pub n: Rational,
}

impl QuatElement {
    pub fn new(k: Rational, l: Rational, m: Rational, n: Rational) -> Self {
        QuatElement { k, l, m, n }
    }

    pub fn from_ints(k: i64, l: i64, m: i64, n: i64) -> Self {
        QuatElement::new(k.into(), l.into(), m.into(), n.into())
    }

    pub fn from_coords(c: [Rational; 4]) -> Self {
        let [k, l, m, n] = c;
        QuatElement { k, l, m, n }
    }

    pub fn coords(&self) -> [Rational; 4] {
        [self.k.clone(), self.l.clone(), self.m.clone(), self.n.clone()]
    }

    pub fn zero() -> Self {
        QuatElement::from_ints(0, 0, 0, 0)
    }

    pub fn one() -> Self {
        QuatElement::from_ints(1, 0, 0, 0)
    }

    pub fn scalar(r: Rational) -> Self {
        QuatElement::new(r, Rational::zero(), Rational::zero(), Rational::zero())
    }

    pub fn x() -> Self {
        QuatElement::from_ints(0, 1, 0, 0)
    }

    pub fn y() -> Self {
        QuatElement::from_ints(0, 0, 1, 0)
    }

    pub fn xy() -> Self {
        QuatElement::from_ints(0, 0, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.k.is_zero() && self.l.is_zero() && self.m.is_zero() && self.n.is_zero()
    }

    /// Scalars are exactly the projectively trivial elements.
    pub fn is_scalar(&self) -> bool {
        self.l.is_zero() && self.m.is_zero() && self.n.is_zero()
    }

    /// The standard involution `k − l·x − m·y − n·xy`.
    pub fn conj(&self) -> Self {
        QuatElement {
            k: self.k.clone(),
            l: -&self.l,
            m: -&self.m,
            n: -&self.n,
        }
    }

    /// Reduced trace `2k`.
    pub fn trd(&self) -> Rational {
        &self.k + &self.k
    }

    pub fn add(&self, o: &Self) -> Self {
        QuatElement {
            k: &self.k + &o.k,
            l: &self.l + &o.l,
            m: &self.m + &o.m,
            n: &self.n + &o.n,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rational::from_int(-1))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QuatElement {
            k: &self.k * r,
            l: &self.l * r,
            m: &self.m * r,
            n: &self.n * r,
        }
    }
}

impl fmt::Display for QuatElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (c, name) in [(&self.k, ""), (&self.l, "x"), (&self.m, "y"), (&self.n, "xy")] {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            match (name, mag == 1) {
                ("", _) => out.push_str(&mag.to_string()),
                (n, true) => out.push_str(n),
                (n, false) => out.push_str(&format!("{mag}{n}")),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for QuatElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.k, self.l, self.m, self.n)
    }
}

impl From<QuatElement> for [String; 4] {
    fn from(q: QuatElement) -> Self {
        q.coords().map(|c| c.to_string())
    }
}

impl TryFrom<[String; 4]> for QuatElement {
    type Error = crate::error::ParseError;
    fn try_from(s: [String; 4]) -> std::result::Result<Self, Self::Error> {
        let [k, l, m, n] = s;
        Ok(QuatElement::new(k.parse()?, l.parse()?, m.parse()?, n.parse()?))
    }
}

/// 2×2 matrix over `Q(√a)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat2Quad(pub [[QuadExt; 2]; 2]);

impl Mat2Quad {
    pub fn mul(&self, o: &Mat2Quad) -> Mat2Quad {
        let a = &self.0;
        let b = &o.0;
        let e = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
        Mat2Quad([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn det(&self) -> QuadExt {
        let a = &self.0;
        &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0])
    }

    pub fn trace(&self) -> QuadExt {
        &self.0[0][0] + &self.0[1][1]
    }

    pub fn first_column(&self) -> [QuadExt; 2] {
        [self.0[0][0].clone(), self.0[1][0].clone()]
    }

    pub fn second_column(&self) -> [QuadExt; 2] {
        [self.0[0][1].clone(), self.0[1][1].clone()]
    }

    pub fn transpose(&self) -> Mat2Quad {
        let a = &self.0;
        Mat2Quad([[a[0][0].clone(), a[1][0].clone()], [a[0][1].clone(), a[1][1].clone()]])
    }
}

/// A place of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Place {
    Prime(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinity => f.write_str("inf"),
        }
    }
}

/// Integer in the same square class as `q` (multiply by `den²`).
fn square_class_integer(q: &Rational) -> IBig {
    q.numer() * q.denom()
}

fn valuation(n: &IBig, p: &IBig) -> (u32, IBig) {
    let mut v = 0;
    let mut n = n.clone();
    while &n % p == IBig::ZERO {
        n = &n / p;
        v += 1;
    }
    (v, n)
}

fn rem_euclid(n: &IBig, m: &IBig) -> IBig {
    let r = n % m;
    if r < IBig::ZERO {
        r + m
    } else {
        r
    }
}

fn mod_pow(base: &IBig, mut exp: u64, m: &IBig) -> IBig {
    let mut result = IBig::ONE;
    let mut b = rem_euclid(base, m);
    while exp > 0 {
        if exp & 1 == 1 {
            result = (&result * &b) % m;
        }
        b = (&b * &b) % m;
        exp >>= 1;
    }
    result
}

/// Legendre symbol of a unit modulo an odd prime, by Euler's criterion.
fn legendre(u: &IBig, p: u64) -> i8 {
    let pb = IBig::from(p);
    let r = mod_pow(u, (p - 1) / 2, &pb);
    if r == IBig::ONE {
        1
    } else {
        -1
    }
}

/// Local Hilbert symbol `(a, b)_v`.
pub fn hilbert_symbol(a: &Rational, b: &Rational, place: Place) -> i8 {
    assert!(!a.is_zero() && !b.is_zero(), "Hilbert symbol of zero");
    match place {
        Place::Infinity => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Prime(p) => {
            let (a, b) = (square_class_integer(a), square_class_integer(b));
            let pb = IBig::from(p);
            let (alpha, u) = valuation(&a, &pb);
            let (beta, v) = valuation(&b, &pb);
            if p == 2 {
                let eight = IBig::from(8);
                let u8 = rem_euclid(&u, &eight);
                let v8 = rem_euclid(&v, &eight);
                let eps = |x: &IBig| -> u32 {
                    if *x == IBig::from(3) || *x == IBig::from(7) {
                        1
                    } else {
                        0
                    }
                };
                let omega = |x: &IBig| -> u32 {
                    if *x == IBig::from(3) || *x == IBig::from(5) {
                        1
                    } else {
                        0
                    }
                };
                let e = eps(&u8) * eps(&v8) + alpha * omega(&v8) + beta * omega(&u8);
                if e % 2 == 0 {
                    1
                } else {
                    -1
                }
            } else {
                let mut s: i8 = if (alpha * beta) % 2 == 1 && p % 4 == 3 { -1 } else { 1 };
                if beta % 2 == 1 {
                    s *= legendre(&u, p);
                }
                if alpha % 2 == 1 {
                    s *= legendre(&v, p);
                }
                s
            }
        }
    }
}

/// Prime divisors of `n` by trial division.
pub fn prime_factors(n: &IBig) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    let mut n = crate::linalg::rational::abs(n);
    let mut d: u64 = 2;
    while IBig::from(d) * IBig::from(d) <= n {
        let db = IBig::from(d);
        if &n % &db == IBig::ZERO {
            out.insert(d);
            while &n % &db == IBig::ZERO {
                n = &n / &db;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > IBig::ONE {
        out.insert(u64::try_from(n).expect("prime factor exceeds u64"));
    }
    out
}

/// Places where the symbol can be −1: 2, primes dividing the square-class
/// integers of `a` and `b`, and infinity.
pub fn candidate_places(a: &Rational, b: &Rational) -> Vec<Place> {
    let mut primes = prime_factors(&square_class_integer(a));
    primes.extend(prime_factors(&square_class_integer(b)));
    primes.insert(2);
    let mut out: Vec<Place> = primes.into_iter().map(Place::Prime).collect();
    out.push(Place::Infinity);
    out
}

/// Finite primes where `(a, b / Q)` ramifies.
pub fn ramified_primes(a: &Rational, b: &Rational) -> BTreeSet<u64> {
    candidate_places(a, b)
        .into_iter()
        .filter_map(|v| match v {
            Place::Prime(p) if hilbert_symbol(a, b, v) == -1 => Some(p),
            _ => None,
        })
        .collect()
}

/// Split at infinity and ramified at some finite prime.
pub fn is_indefinite_division(a: &Rational, b: &Rational) -> bool {
    hilbert_symbol(a, b, Place::Infinity) == 1 && !ramified_primes(a, b).is_empty()
}
