//! CM points: fixed points in `H₁` of elliptic elements of the order, the
//! eigenvalue `τ′`, and windowed enumeration with exact deduplication.

use std::collections::HashMap;

use dashu_int::IBig;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{fmt_c, QuadraticData, UpperHalfPoint, RESIDUAL_TOLERANCE_EXP};
use crate::linalg::{solve_quadratic, Complex, Rational, Real};
use crate::orders::{box_points, OrderLattice};
use crate::quaternion::{AlgebraParams, NumericAlgebra, QuatElement};

/// Non-scalar with `nrd > 0` and `trd² < 4·nrd`.
pub fn is_elliptic(params: &AlgebraParams, mu: &QuatElement) -> bool {
    if mu.is_scalar() {
        return false;
    }
    let n = params.nrd(mu);
    let t = mu.trd();
    n.is_positive() && &t * &t < Rational::from_int(4) * &n
}

/// Exact equation `Cτ² + (D − A)τ − B = 0` for `embed(μ) = [[A, B], [C, D]]`.
pub fn fixed_point_equation(params: &AlgebraParams, mu: &QuatElement) -> Result<QuadraticData> {
    if !is_elliptic(params, mu) {
        return Err(Error::NotElliptic(mu.to_string()));
    }
    let [[a, b], [c, d]] = params.embed(mu).0;
    Ok(QuadraticData {
        c1: &d - &a,
        c0: -&b,
        c2: c,
    })
}

/// The fixed point of `μ` in `H₁`, with its exact equation attached.
pub fn fixed_point(params: &AlgebraParams, mu: &QuatElement, prec: usize) -> Result<UpperHalfPoint> {
    let q = fixed_point_equation(params, mu)?;
    let (root, _) = solve_quadratic(&q.c2, &q.c1, &q.c0, prec);
    Ok(UpperHalfPoint::new(root)?.with_exact(q))
}

/// `τ′ = Cτ + D`, checked against both coordinates of
/// `embed(μ)·(τ,1)ᵗ = τ′·(τ,1)ᵗ`.
pub fn eigenvalue_tau_prime(num: &NumericAlgebra, mu: &QuatElement, tau: &UpperHalfPoint) -> Result<Complex> {
    let t = tau.tau();
    let [v0, v1] = num.apply(mu, t);
    let tp = v1.clone();
    let residual = (&v0 - &(&tp * t)).abs();
    let tol = Real::pow10_neg(RESIDUAL_TOLERANCE_EXP, num.precision());
    if residual >= tol {
        return Err(Error::EigenMismatch(format!(
            "residual {} for μ = {mu} at τ = {}",
            residual.to_decimal_string(6),
            fmt_c(t)
        )));
    }
    if !tp.im.is_positive() {
        return Err(Error::NegativeOrientation(format!("Im τ′ ≤ 0 for μ = {mu}")));
    }
    Ok(tp)
}

/// An elliptic `μ` with its fixed point `τ` and eigenvalue `τ′`.
#[derive(Clone, Debug)]
pub struct CMPoint {
    pub params: AlgebraParams,
    pub mu: QuatElement,
    /// Coordinates of `μ` in the order basis, when known.
    pub coords: Option<[i64; 4]>,
    pub tau: UpperHalfPoint,
    pub tau_prime: Complex,
    /// `(trd μ, nrd μ)`: `τ′` is a root of `T² − trd·T + nrd`.
    pub char_poly: (Rational, Rational),
}

impl CMPoint {
    /// Requires `C > 0` in `embed(μ)`, i.e. `Im τ′ > 0`; `−μ` has the same
    /// fixed point and the opposite orientation.
    pub fn new(num: &NumericAlgebra, mu: QuatElement) -> Result<Self> {
        let params = &num.params;
        if !is_elliptic(params, &mu) {
            return Err(Error::NotElliptic(mu.to_string()));
        }
        let c = &params.embed(&mu).0[1][0];
        if !c.is_positive() {
            return Err(Error::NegativeOrientation(format!(
                "lower-left entry {c} of μ = {mu} is not positive"
            )));
        }
        let tau = fixed_point(params, &mu, num.precision())?;
        let tau_prime = eigenvalue_tau_prime(num, &mu, &tau)?;
        let char_poly = (mu.trd(), params.nrd(&mu));
        Ok(CMPoint {
            params: params.clone(),
            mu,
            coords: None,
            tau,
            tau_prime,
            char_poly,
        })
    }

    /// `|τ′² − trd·τ′ + nrd|`.
    pub fn char_poly_residual(&self) -> Real {
        let p = self.tau_prime.precision();
        let t = Complex::from_real(Real::from_rational(&self.char_poly.0, p));
        let n = Complex::from_real(Real::from_rational(&self.char_poly.1, p));
        let tp = &self.tau_prime;
        (&(&(tp * tp) - &(&t * tp)) + &n).abs()
    }

    /// Monic equation of `τ` over Q(√a), the deduplication key.
    pub fn key(&self) -> QuadraticData {
        self.tau.exact().expect("constructed with exact data").monic()
    }

    pub fn summary(&self) -> CMPointSummary {
        let q = self.key();
        CMPointSummary {
            mu: self.mu.to_string(),
            mu_coords: self.mu.coords().map(|c| c.to_string()),
            order_coords: self.coords,
            tau: fmt_c(self.tau.tau()),
            tau_equation: q.to_strings(),
            tau_prime: fmt_c(&self.tau_prime),
            char_poly: format!("T^2 - ({})T + ({})", self.char_poly.0, self.char_poly.1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CMPointSummary {
    pub mu: String,
    pub mu_coords: [String; 4],
    pub order_coords: Option<[i64; 4]>,
    pub tau: String,
    /// Coefficients `[1, c1, c0]` of the monic equation of `τ`.
    pub tau_equation: [String; 3],
    pub tau_prime: String,
    pub char_poly: String,
}

/// `μ′ = n·λ⁻¹·μ` with the least `n > 0` placing `μ′` in the order.
pub fn normalize_isogeny(order: &OrderLattice, lambda: &QuatElement, mu: &QuatElement) -> Result<(QuatElement, IBig)> {
    let params = order.params();
    let inv = params.inverse(lambda).ok_or(Error::Singular)?;
    let q = params.mul(&inv, mu);
    let n = order
        .coordinates(&q)
        .iter()
        .fold(IBig::ONE, |acc, c| crate::linalg::rational::lcm(&acc, &c.denom()));
    Ok((q.scale(&Rational::from_ibig(n.clone())), n))
}

/// Closed rectangle `[re_min, re_max] × [im_min, im_max]` in `H₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub re_min: Rational,
    pub re_max: Rational,
    pub im_min: Rational,
    pub im_max: Rational,
}

impl Window {
    pub fn new(re_min: Rational, re_max: Rational, im_min: Rational, im_max: Rational) -> Self {
        Window {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn from_f64(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        let r = |x: f64| x.to_string().parse::<Rational>().expect("finite");
        Window::new(r(re_min), r(re_max), r(im_min), r(im_max))
    }

    /// `[-2, 2] × (0, 4]`, generous enough for small heights.
    pub fn default_window() -> Self {
        Window::new(
            Rational::from_int(-2),
            Rational::from_int(2),
            Rational::zero(),
            Rational::from_int(4),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.re_min > self.re_max || self.im_min > self.im_max
    }

    pub fn contains(&self, z: &Complex) -> bool {
        let p = z.precision();
        let r = |q: &Rational| Real::from_rational(q, p);
        z.re >= r(&self.re_min) && z.re <= r(&self.re_max) && z.im >= r(&self.im_min) && z.im <= r(&self.im_max)
    }

    pub fn to_strings(&self) -> [String; 4] {
        [&self.re_min, &self.re_max, &self.im_min, &self.im_max].map(|q| q.to_string())
    }
}

fn coord_norm(c: &[i64; 4]) -> i64 {
    c.iter().map(|x| x * x).sum()
}

/// CM points from elliptic `μ` of height ≤ `height` (coordinates in the
/// order basis) with positive orientation and fixed point in `window`.
/// Points with the same exact `τ` are merged, keeping the `μ` of least
/// coordinate norm (first in lexicographic order on ties); the result is
/// sorted by the coordinates of the kept `μ`.
pub fn enumerate_cm_points(order: &OrderLattice, num: &NumericAlgebra, height: i64, window: &Window) -> Result<Vec<CMPoint>> {
    if height < 1 || window.is_empty() {
        return Ok(Vec::new());
    }
    let params = order.params();
    let mut best: HashMap<QuadraticData, CMPoint> = HashMap::new();
    for c in box_points(-height, height) {
        let mu = order.element(&c);
        if !is_elliptic(params, &mu) || !params.embed(&mu).0[1][0].is_positive() {
            continue;
        }
        let tau = fixed_point(params, &mu, num.precision())?;
        if !window.contains(tau.tau()) {
            continue;
        }
        let key = tau.exact().expect("exact").monic();
        let better = best.get(&key).is_none_or(|b| coord_norm(&c) < coord_norm(&b.coords.expect("set")));
        if better {
            let mut p = CMPoint::new(num, mu)?;
            p.coords = Some(c);
            best.insert(key, p);
        }
    }
    let mut out: Vec<CMPoint> = best.into_values().collect();
    out.sort_by_key(|p| p.coords);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::moebius_act;
    use crate::linalg::DEFAULT_PRECISION;
    use crate::orders::default_order;
    use proptest::prelude::*;

    const P: usize = DEFAULT_PRECISION;

    fn setup() -> (OrderLattice, NumericAlgebra) {
        let o = default_order();
        let num = o.params().numeric(P);
        (o, num)
    }

    fn close(a: &Complex, b: &Complex) -> bool {
        (a - b).abs() < Real::pow10_neg(30, P)
    }

    fn c(re: Real, im: Real) -> Complex {
        Complex::new(re, im)
    }

    fn r(x: i64) -> Real {
        Real::from_int(x, P)
    }

    fn x_plus_2y() -> QuatElement {
        QuatElement::from_ints(0, 1, 2, 0)
    }

    #[test]
    fn ellipticity() {
        let p = AlgebraParams::from_ints(3, -1).unwrap();
        assert!(is_elliptic(&p, &QuatElement::y()));
        assert!(!is_elliptic(&p, &QuatElement::x()));
        assert!(!is_elliptic(&p, &QuatElement::from_ints(5, 0, 0, 0)));
        assert!(is_elliptic(&p, &x_plus_2y()));
        assert!(is_elliptic(&p, &QuatElement::from_ints(1, 0, 1, 0)));
        // 2 + y: trd 4, nrd 5, 16 < 20
        assert!(is_elliptic(&p, &QuatElement::from_ints(2, 0, 1, 0)));
        // 3 + x: trd 6, nrd 6, 36 ≥ 24 (hyperbolic)
        assert!(!is_elliptic(&p, &QuatElement::from_ints(3, 1, 0, 0)));
    }

    #[test]
    fn fixed_points() {
        let (o, _) = setup();
        let p = o.params();
        let i = Complex::i(P);
        assert!(close(fixed_point(p, &QuatElement::y(), P).unwrap().tau(), &i));
        let expected = c(r(3).sqrt() / r(2), Real::from_rational(&Rational::new(1, 2), P));
        assert!(close(fixed_point(p, &x_plus_2y(), P).unwrap().tau(), &expected));
        assert!(close(fixed_point(p, &QuatElement::from_ints(1, 0, 1, 0), P).unwrap().tau(), &i));
        assert!(matches!(fixed_point(p, &QuatElement::x(), P), Err(Error::NotElliptic(_))));
        // y and 1+y have the same monic equation
        let a = fixed_point(p, &QuatElement::y(), P).unwrap().exact().unwrap().monic();
        let b = fixed_point(p, &QuatElement::from_ints(1, 0, 1, 0), P)
            .unwrap()
            .exact()
            .unwrap()
            .monic();
        assert_eq!(a, b);
    }

    #[test]
    fn tau_prime_examples() {
        let (_, num) = setup();
        let i = Complex::i(P);
        let cm = CMPoint::new(&num, QuatElement::y()).unwrap();
        assert!(close(&cm.tau_prime, &i));
        let cm = CMPoint::new(&num, x_plus_2y()).unwrap();
        assert!(close(&cm.tau_prime, &i));
        let cm = CMPoint::new(&num, QuatElement::from_ints(1, 0, 1, 0)).unwrap();
        assert!(close(&cm.tau_prime, &c(r(1), r(1))));
        assert_eq!(cm.char_poly, (Rational::from_int(2), Rational::from_int(2)));
        assert!(cm.char_poly_residual() < Real::pow10_neg(30, P));
    }

    #[test]
    fn eigen_mismatch_off_the_fixed_point() {
        let (_, num) = setup();
        let t = UpperHalfPoint::from_f64(0.5, 2.0, P).unwrap();
        assert!(matches!(
            eigenvalue_tau_prime(&num, &QuatElement::y(), &t),
            Err(Error::EigenMismatch(_))
        ));
    }

    #[test]
    fn negative_orientation_rejected() {
        let (_, num) = setup();
        assert!(matches!(
            CMPoint::new(&num, QuatElement::y().neg()),
            Err(Error::NegativeOrientation(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let (o, _) = setup();
        let p = o.params();
        let mu = QuatElement::from_ints(2, 1, -1, 1);
        assert_eq!(normalize_isogeny(&o, &QuatElement::one(), &mu).unwrap(), (mu.clone(), IBig::ONE));
        let two = QuatElement::from_ints(2, 0, 0, 0);
        let two_y = QuatElement::from_ints(0, 0, 2, 0);
        assert_eq!(normalize_isogeny(&o, &two, &two_y).unwrap(), (QuatElement::y(), IBig::ONE));
        let prod = p.mul(&QuatElement::y(), &x_plus_2y());
        assert_eq!(normalize_isogeny(&o, &QuatElement::y(), &prod).unwrap(), (x_plus_2y(), IBig::ONE));
        // λ = 3: λ⁻¹·y = y/3 needs n = 3
        let (m, n) = normalize_isogeny(&o, &QuatElement::from_ints(3, 0, 0, 0), &QuatElement::y()).unwrap();
        assert_eq!((m, n), (QuatElement::y(), IBig::from(3)));
    }

    #[test]
    fn normalized_mu_keeps_fixed_point() {
        let (o, num) = setup();
        let p = o.params();
        let lambda = QuatElement::from_ints(1, 1, 0, 0);
        let mu = p.mul(&lambda, &x_plus_2y());
        let (m, _) = normalize_isogeny(&o, &lambda, &mu).unwrap();
        let t1 = fixed_point(p, &m, P).unwrap();
        let t2 = fixed_point(p, &x_plus_2y(), P).unwrap();
        assert!(close(t1.tau(), t2.tau()));
        assert!(CMPoint::new(&num, m).is_ok());
    }

    #[test]
    fn enumeration_examples() {
        let (o, num) = setup();
        let w = Window::from_f64(-1.0, 1.0, 0.1, 2.0);
        let h1 = enumerate_cm_points(&o, &num, 1, &w).unwrap();
        assert!(h1.iter().any(|p| p.mu == QuatElement::y() && close(p.tau.tau(), &Complex::i(P))));
        let h2 = enumerate_cm_points(&o, &num, 2, &w).unwrap();
        let target = c(r(3).sqrt() / r(2), Real::from_rational(&Rational::new(1, 2), P));
        assert!(h2.iter().any(|p| close(p.tau.tau(), &target)));
        let empty = Window::from_f64(1.0, -1.0, 0.1, 2.0);
        assert!(enumerate_cm_points(&o, &num, 2, &empty).unwrap().is_empty());
        let far = Window::from_f64(50.0, 51.0, 0.1, 0.2);
        assert!(enumerate_cm_points(&o, &num, 1, &far).unwrap().is_empty());
        assert!(enumerate_cm_points(&o, &num, 0, &w).unwrap().is_empty());
    }

    #[test]
    fn enumeration_invariants() {
        let (o, num) = setup();
        let pts = enumerate_cm_points(&o, &num, 2, &Window::default_window()).unwrap();
        let mut keys = std::collections::HashSet::new();
        for p in &pts {
            assert!(!p.mu.is_scalar());
            assert!(keys.insert(p.key()));
            let v = num.apply(&p.mu, p.tau.tau());
            let t = p.tau.tau();
            assert!((&v[0] - &(&p.tau_prime * t)).abs() < Real::pow10_neg(20, P));
            assert!((&v[1] - &p.tau_prime).abs() < Real::pow10_neg(20, P));
            assert!(p.tau.tau().im.is_positive() && p.tau_prime.im.is_positive());
            assert!(p.char_poly_residual() < Real::pow10_neg(20, P));
            assert_eq!(o.element(&p.coords.unwrap()), p.mu);
        }
        let mut sorted = pts.iter().map(|p| p.coords).collect::<Vec<_>>();
        sorted.sort();
        assert_eq!(sorted, pts.iter().map(|p| p.coords).collect::<Vec<_>>());
    }

    /// Independent check: on the list of all elliptic μ in the box, the set
    /// of distinct fixed points (compared numerically) has the same size.
    #[test]
    fn brute_force_equivalence() {
        let (o, num) = setup();
        let w = Window::from_f64(-1.5, 1.5, 0.05, 3.0);
        let pts = enumerate_cm_points(&o, &num, 2, &w).unwrap();
        let mut taus: Vec<Complex> = Vec::new();
        for c in box_points(-2, 2) {
            let mu = o.element(&c);
            let [[a, b], [cc, d]] = num.matrix(&mu);
            let t = &a + &d;
            let det = &a * &d - &b * &cc;
            let disc = &det * &r(4) - &t * &t;
            if mu.is_scalar() || !det.is_positive() || !disc.is_positive() {
                continue;
            }
            // τ = (a − d + i·√disc)/(2c), choose sign so Im > 0
            let two_c = &cc * &r(2);
            let im = disc.sqrt() / &two_c;
            let tau = c_abs_im(&((&a - &d) / &two_c), &im);
            if w.contains(&tau) && !taus.iter().any(|x| (x - &tau).abs() < Real::pow10_neg(25, P)) {
                taus.push(tau);
            }
        }
        assert_eq!(taus.len(), pts.len());
        for t in &taus {
            assert!(pts.iter().any(|p| (p.tau.tau() - t).abs() < Real::pow10_neg(25, P)));
        }
    }

    fn c_abs_im(re: &Real, im: &Real) -> Complex {
        Complex::new(re.clone(), im.abs())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn conjugation_moves_fixed_points(mc in proptest::array::uniform4(-2i64..=2), ui in 0usize..64) {
            let (o, num) = setup();
            let p = o.params();
            let mu = o.element(&mc);
            prop_assume!(is_elliptic(p, &mu));
            let units = o.enumerate_units(1);
            let g = &units[ui % units.len()].element;
            let conj = p.mul(&p.mul(g, &mu), &g.conj());
            let lhs = fixed_point(p, &conj, P).unwrap();
            let rhs = moebius_act(&num, g, &fixed_point(p, &mu, P).unwrap()).unwrap();
            prop_assert!((lhs.tau() - rhs.tau()).abs() < Real::pow10_neg(25, P));
        }
    }
}
