use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_base::Sign;
use dashu_float::{round::mode::HalfEven, FBig};
use dashu_int::IBig;

use super::rational::Rational;

type Float = FBig<HalfEven, 2>;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 128;

/// Arbitrary-precision binary float with an explicit working precision.
///
/// Results of binary operations carry the larger precision of the two
/// operands.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn zero(prec: usize) -> Self {
        Real(Float::ZERO.with_precision(prec).value())
    }

    pub fn one(prec: usize) -> Self {
        Real::from_int(1, prec)
    }

    pub fn from_int(n: i64, prec: usize) -> Self {
        Real(Float::from(IBig::from(n)).with_precision(prec).value())
    }

    pub fn from_ibig(n: &IBig, prec: usize) -> Self {
        Real(Float::from(n.clone()).with_precision(prec).value())
    }

    pub fn from_rational(q: &Rational, prec: usize) -> Self {
        let n = Float::from(q.numer().clone()).with_precision(prec).value();
        if q.is_integer() {
            return Real(n);
        }
        let d = Float::from(q.denom()).with_precision(prec).value();
        Real(n / d)
    }

    /// Exact conversion of a finite `f64`, rounded to `prec` bits.
    pub fn from_f64(x: f64, prec: usize) -> Self {
        let f = Float::try_from(x).expect("finite f64");
        Real(f.with_precision(prec).value())
    }

    pub fn precision(&self) -> usize {
        self.0.precision()
    }

    /// The same value rounded (or padded) to `prec` bits.
    pub fn with_precision(&self, prec: usize) -> Self {
        Real(self.0.clone().with_precision(prec).value())
    }

    pub fn is_zero(&self) -> bool {
        {
            let r = self.0.repr();
            r.is_pos_zero() || r.is_neg_zero()
        }
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == Sign::Negative && !self.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.sign() == Sign::Positive && !self.is_zero()
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "square root of a negative number");
        if self.is_zero() {
            return self.clone();
        }
        Real(self.0.sqrt())
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn recip(&self) -> Self {
        Real::one(self.precision()) / self
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    /// Nearest integer (ties away from zero are irrelevant for our uses).
    pub fn round_to_int(&self) -> IBig {
        self.0.round().to_int().value()
    }

    /// `2^-bits` at precision `prec`.
    pub fn pow2_neg(bits: usize, prec: usize) -> Self {
        Real(Float::from_parts(IBig::ONE, -(bits as isize)).with_precision(prec).value())
    }

    /// `10^-k` at the given precision.
    pub fn pow10_neg(k: u32, prec: usize) -> Self {
        Real::from_rational(&Rational::one().recip_pow10(k), prec)
    }

    /// Decimal rendering with at most `digits` significant digits and
    /// trailing zeros removed.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let dec = self.0.to_decimal().value().with_precision(digits).value();
        let (sig, exp) = dec.repr().clone().into_parts();
        format_decimal(&sig, exp)
    }

    pub(crate) fn cmp_total(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

/// Renders `sig · 10^exp` without an exponent when it is short enough.
fn format_decimal(sig: &IBig, exp: isize) -> String {
    let neg = *sig < IBig::ZERO;
    let mut digits = if neg { (-sig.clone()).to_string() } else { sig.to_string() };
    let mut exp = exp;
    while digits.len() > 1 && digits.ends_with('0') {
        digits.pop();
        exp += 1;
    }
    let n = digits.len() as isize;
    let point = n + exp; // position of the decimal point from the left
    let body = if exp >= 0 && point <= 30 {
        format!("{digits}{}", "0".repeat(exp as usize))
    } else if point > 0 && exp < 0 {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    } else if point <= 0 && point > -6 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else {
        let (a, b) = digits.split_at(1);
        let e = point - 1;
        if b.is_empty() {
            format!("{a}e{e}")
        } else {
            format!("{a}.{b}e{e}")
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(30);
        f.write_str(&self.to_decimal_string(digits))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(40))
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(&self.0 $op &rhs.0)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(self.0 $op rhs.0)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(self.0 $op &rhs.0)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(&self.0 $op rhs.0)
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

/// Complex number over [`Real`].
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: usize) -> Self {
        Complex::new(Real::zero(prec), Real::zero(prec))
    }

    pub fn one(prec: usize) -> Self {
        Complex::new(Real::one(prec), Real::zero(prec))
    }

    pub fn i(prec: usize) -> Self {
        Complex::new(Real::zero(prec), Real::one(prec))
    }

    pub fn from_real(re: Real) -> Self {
        let prec = re.precision();
        Complex::new(re, Real::zero(prec))
    }

    pub fn from_rationals(re: &Rational, im: &Rational, prec: usize) -> Self {
        Complex::new(Real::from_rational(re, prec), Real::from_rational(im, prec))
    }

    pub fn precision(&self) -> usize {
        self.re.precision().max(self.im.precision())
    }

    pub fn with_precision(&self, prec: usize) -> Self {
        Complex::new(self.re.with_precision(prec), self.im.with_precision(prec))
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Real {
        self.re.square() + self.im.square()
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Complex::new(&self.re / &n, -(&self.im / &n))
    }

    pub fn scale(&self, r: &Real) -> Self {
        Complex::new(&self.re * r, &self.im * r)
    }

    /// `a + b i` form with `digits` significant digits per part; parts
    /// smaller than `10^-digits` relative to the larger part are dropped.
    pub fn to_display_string(&self, digits: usize) -> String {
        let prec = self.precision();
        let big = self.re.abs().max(self.im.abs());
        if big.is_zero() {
            return "0".to_string();
        }
        let cutoff = &big * &Real::from_rational(&Rational::one().recip_pow10(digits as u32), prec);
        let re_zero = self.re.abs() < cutoff;
        let im_zero = self.im.abs() < cutoff;
        let im_str = |x: &Real| {
            let s = x.to_decimal_string(digits);
            match s.as_str() {
                "1" => "i".to_string(),
                "-1" => "-i".to_string(),
                _ => format!("{s}i"),
            }
        };
        match (re_zero, im_zero) {
            (false, true) => self.re.to_decimal_string(digits),
            (true, false) => im_str(&self.im),
            _ => {
                let im = im_str(&self.im.abs());
                let sign = if self.im.is_negative() { '-' } else { '+' };
                format!("{}{sign}{im}", self.re.to_decimal_string(digits))
            }
        }
    }
}

impl Rational {
    /// `self · 10^-k`.
    pub(crate) fn recip_pow10(&self, k: u32) -> Rational {
        self / &Rational::from_int(10).pow(k)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_display_string(f.precision().unwrap_or(30)))
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.re, self.im)
    }
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re * &rhs.re - &self.im * &rhs.im, &self.re * &rhs.im + &self.im * &rhs.re)
    }
}

impl Div<&Complex> for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        let n = rhs.norm_sqr();
        let num = self * &rhs.conj();
        Complex::new(&num.re / &n, &num.im / &n)
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        -&self
    }
}

macro_rules! complex_owned {
    ($trait:ident, $method:ident) => {
        impl $trait<Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                (&self).$method(rhs)
            }
        }
        impl $trait<Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                self.$method(&rhs)
            }
        }
    };
}

complex_owned!(Add, add);
complex_owned!(Sub, sub);
complex_owned!(Mul, mul);
complex_owned!(Div, div);
