use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::rational::Rational;
use super::real::Real;
use crate::error::{Error, Result};

/// The real quadratic field Q(√a) for a positive non-square rational `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadField {
    radicand: Arc<Rational>,
}

impl QuadField {
    pub fn new(radicand: Rational) -> Result<Self> {
        if !radicand.is_positive() {
            return Err(Error::InvalidAlgebra(format!("radicand {radicand} must be positive")));
        }
        if radicand.is_square() {
            return Err(Error::InvalidAlgebra(format!("radicand {radicand} is a rational square")));
        }
        Ok(QuadField {
            radicand: Arc::new(radicand),
        })
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    pub fn elem(&self, u: Rational, v: Rational) -> QuadExt {
        QuadExt {
            u,
            v,
            radicand: self.radicand.clone(),
        }
    }

    pub fn rational(&self, u: Rational) -> QuadExt {
        self.elem(u, Rational::zero())
    }

    pub fn zero(&self) -> QuadExt {
        self.rational(Rational::zero())
    }

    pub fn one(&self) -> QuadExt {
        self.rational(Rational::one())
    }

    /// √a itself.
    pub fn sqrt(&self) -> QuadExt {
        self.elem(Rational::zero(), Rational::one())
    }
}

/// `u + v·√a`, exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    pub u: Rational,
    pub v: Rational,
    radicand: Arc<Rational>,
}

impl QuadExt {
    pub fn field(&self) -> QuadField {
        QuadField {
            radicand: self.radicand.clone(),
        }
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.v.is_zero()
    }

    /// Galois conjugate `u − v√a`.
    pub fn galois_conj(&self) -> Self {
        QuadExt {
            u: self.u.clone(),
            v: -&self.v,
            radicand: self.radicand.clone(),
        }
    }

    /// Field norm `u² − a·v²`; nonzero unless the element is zero.
    pub fn norm(&self) -> Rational {
        &self.u * &self.u - &*self.radicand * &self.v * &self.v
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        let n = self.norm();
        let c = self.galois_conj();
        QuadExt {
            u: &c.u / &n,
            v: &c.v / &n,
            radicand: self.radicand.clone(),
        }
    }

    /// Exact sign in the real embedding √a > 0.
    pub fn signum(&self) -> Ordering {
        let su = self.u.cmp(&Rational::zero());
        let sv = self.v.cmp(&Rational::zero());
        match (su, sv) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (a, b) if a == b => a,
            (su, _) => {
                // opposite signs: compare u² with a·v²
                let lhs = &self.u * &self.u;
                let rhs = &*self.radicand * &self.v * &self.v;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => su,
                    Ordering::Less => su.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QuadExt {
            u: &self.u * r,
            v: &self.v * r,
            radicand: self.radicand.clone(),
        }
    }

    /// Numeric value given √a at the wanted precision.
    pub fn to_real(&self, sqrt_radicand: &Real) -> Real {
        let prec = sqrt_radicand.precision();
        let u = Real::from_rational(&self.u, prec);
        if self.v.is_zero() {
            return u;
        }
        u + Real::from_rational(&self.v, prec) * sqrt_radicand
    }

    fn check(&self, other: &Self) {
        debug_assert!(
            self.radicand == other.radicand,
            "mixing elements of Q(√{}) and Q(√{})",
            self.radicand,
            other.radicand
        );
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let root = format!("√{}", self.radicand);
        match (self.u.is_zero(), self.v.is_zero()) {
            (_, true) => write!(f, "{}", self.u),
            (true, false) if self.v == 1 => write!(f, "{root}"),
            (true, false) if self.v == -1 => write!(f, "-{root}"),
            (true, false) => write!(f, "{}*{root}", self.v),
            (false, false) => {
                let sign = if self.v.is_negative() { '-' } else { '+' };
                let v = self.v.abs();
                if v == 1 {
                    write!(f, "{}{sign}{root}", self.u)
                } else {
                    write!(f, "{}{sign}{v}*{root}", self.u)
                }
            }
        }
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &QuadExt) -> QuadExt {
        self.check(rhs);
        QuadExt {
            u: &self.u + &rhs.u,
            v: &self.v + &rhs.v,
            radicand: self.radicand.clone(),
        }
    }
}

impl Sub<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &QuadExt) -> QuadExt {
        self.check(rhs);
        QuadExt {
            u: &self.u - &rhs.u,
            v: &self.v - &rhs.v,
            radicand: self.radicand.clone(),
        }
    }
}

impl Mul<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &QuadExt) -> QuadExt {
        self.check(rhs);
        QuadExt {
            u: &self.u * &rhs.u + &*self.radicand * &self.v * &rhs.v,
            v: &self.u * &rhs.v + &self.v * &rhs.u,
            radicand: self.radicand.clone(),
        }
    }
}

impl Div<&QuadExt> for &QuadExt {
    type Output = QuadExt;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &QuadExt) -> QuadExt {
        self * &rhs.recip()
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt {
            u: -&self.u,
            v: -&self.v,
            radicand: self.radicand.clone(),
        }
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &QuadExt) -> QuadExt {
                (&self).$method(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> QuadField {
        QuadField::new(Rational::from_int(3)).unwrap()
    }

    #[test]
    fn rejects_squares_and_nonpositive() {
        assert!(QuadField::new(Rational::from_int(4)).is_err());
        assert!(QuadField::new(Rational::new(9, 4)).is_err());
        assert!(QuadField::new(Rational::from_int(-3)).is_err());
        assert!(QuadField::new(Rational::from_int(1)).is_err());
    }

    #[test]
    fn sqrt_squares_to_radicand() {
        let f = q3();
        let s = f.sqrt();
        assert_eq!(&s * &s, f.rational(Rational::from_int(3)));
    }

    #[test]
    fn inverse_and_sign() {
        let f = q3();
        // 2 - √3 > 0, 1 - √3 < 0
        let a = f.elem(Rational::from_int(2), Rational::from_int(-1));
        let b = f.elem(Rational::from_int(1), Rational::from_int(-1));
        assert!(a.is_positive());
        assert!(b.is_negative());
        assert_eq!(&a * &a.recip(), f.one());
        assert_eq!(a.recip(), f.elem(Rational::from_int(2), Rational::from_int(1)));
        assert_eq!(f.zero().signum(), Ordering::Equal);
    }

    #[test]
    fn display() {
        let f = q3();
        assert_eq!(f.sqrt().to_string(), "√3");
        assert_eq!(f.elem(Rational::new(1, 2), Rational::from_int(-2)).to_string(), "1/2-2*√3");
    }
}
