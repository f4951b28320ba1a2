//! Lattices and orders in `B`: certification, discriminants, saturation to
//! a maximal order, and bounded enumeration of units of norm one.

use std::fmt;

use dashu_int::IBig;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{exact_rank, hermite_normal_form, MatrixQ, Rational};
use crate::quaternion::{prime_factors, AlgebraParams, QuatElement};

/// Rank-4 lattice in `B`, rows of `basis` are the generators in
/// `(1, x, y, xy)` coordinates.
#[derive(Clone)]
pub struct OrderLattice {
    params: AlgebraParams,
    basis: MatrixQ,
    inverse: MatrixQ,
    generators: Vec<QuatElement>,
}

impl PartialEq for OrderLattice {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.basis == other.basis
    }
}

impl fmt::Debug for OrderLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrderLattice")
            .field("params", &self.params)
            .field("basis", &self.basis)
            .finish()
    }
}

/// Outcome of [`OrderLattice::is_order`] with the violated conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderCertificate {
    pub contains_one: bool,
    pub closed_under_multiplication: bool,
    pub integral_basis: bool,
    pub violations: Vec<String>,
}

impl OrderCertificate {
    pub fn is_order(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A lattice element of reduced norm one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnitSample {
    pub element: QuatElement,
    /// Coordinates in the lattice basis.
    pub coords: [i64; 4],
    pub norm: String,
    pub is_elliptic: bool,
}

impl OrderLattice {
    pub fn new(params: AlgebraParams, basis: MatrixQ) -> Result<Self> {
        if basis.rows() != 4 || basis.cols() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "order basis must be 4x4, got {}x{}",
                basis.rows(),
                basis.cols()
            )));
        }
        let rank = exact_rank(&basis);
        if rank < 4 {
            return Err(Error::DegenerateLattice { rank });
        }
        let inverse = basis.inverse()?;
        let generators = basis
            .to_rows()
            .into_iter()
            .map(|r| QuatElement::from_coords([r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone()]))
            .collect();
        Ok(OrderLattice {
            params,
            basis,
            inverse,
            generators,
        })
    }

    /// `Z⟨1, x, y, xy⟩`.
    pub fn standard(params: AlgebraParams) -> Self {
        OrderLattice::new(params, MatrixQ::identity(4)).expect("identity has rank 4")
    }

    /// Lattice spanned by arbitrary rational generators (at least rank 4),
    /// in Hermite normal form.
    pub fn from_generators(params: AlgebraParams, gens: &[QuatElement]) -> Result<Self> {
        let rows = MatrixQ::from_rows(gens.iter().map(|g| g.coords().to_vec()).collect())?;
        let den = rows.common_denominator();
        let int_rows: Vec<Vec<IBig>> = gens
            .iter()
            .map(|g| {
                g.coords()
                    .iter()
                    .map(|c| (c * &Rational::from_ibig(den.clone())).to_integer().expect("cleared"))
                    .collect()
            })
            .collect();
        let hnf = hermite_normal_form(&int_rows);
        if hnf.len() < 4 {
            return Err(Error::DegenerateLattice { rank: hnf.len() });
        }
        let d = Rational::from_ibig(den);
        let basis = MatrixQ::from_rows(
            hnf.into_iter()
                .map(|r| r.into_iter().map(|x| Rational::from_ibig(x) / &d).collect())
                .collect(),
        )?;
        OrderLattice::new(params, basis)
    }

    pub fn params(&self) -> &AlgebraParams {
        &self.params
    }

    pub fn basis(&self) -> &MatrixQ {
        &self.basis
    }

    pub fn generators(&self) -> &[QuatElement] {
        &self.generators
    }

    /// Coordinates of `q` in the lattice basis (rational in general).
    pub fn coordinates(&self, q: &QuatElement) -> Vec<Rational> {
        self.inverse_apply(&q.coords())
    }

    fn inverse_apply(&self, v: &[Rational; 4]) -> Vec<Rational> {
        (0..4).map(|j| (0..4).map(|i| &v[i] * self.inverse.get(i, j)).sum()).collect()
    }

    pub fn contains(&self, q: &QuatElement) -> bool {
        self.coordinates(q).iter().all(Rational::is_integer)
    }

    /// Integer coordinates of `q`, or `None` when `q` is outside.
    pub fn integer_coordinates(&self, q: &QuatElement) -> Option<[IBig; 4]> {
        let c = self.coordinates(q);
        let v: Vec<IBig> = c.iter().map(Rational::to_integer).collect::<Option<_>>()?;
        v.try_into().ok()
    }

    /// `Σ cᵢ·λᵢ`.
    pub fn element(&self, coords: &[i64; 4]) -> QuatElement {
        self.generators
            .iter()
            .zip(coords)
            .fold(QuatElement::zero(), |acc, (g, &c)| acc.add(&g.scale(&Rational::from_int(c))))
    }

    pub fn is_integral(&self, q: &QuatElement) -> bool {
        q.trd().is_integer() && self.params.nrd(q).is_integer()
    }

    pub fn is_order(&self) -> OrderCertificate {
        let mut violations = Vec::new();
        let contains_one = self.contains(&QuatElement::one());
        if !contains_one {
            violations.push("1 is not in the lattice".to_string());
        }
        let mut integral_basis = true;
        for (i, g) in self.generators.iter().enumerate() {
            if !self.is_integral(g) {
                integral_basis = false;
                violations.push(format!(
                    "generator {} = {g} is not integral (trd {}, nrd {})",
                    i + 1,
                    g.trd(),
                    self.params.nrd(g)
                ));
            }
        }
        let mut closed = true;
        for (i, gi) in self.generators.iter().enumerate() {
            for (j, gj) in self.generators.iter().enumerate() {
                let p = self.params.mul(gi, gj);
                if !self.contains(&p) {
                    closed = false;
                    violations.push(format!("product of generators {} and {} = {p} is outside", i + 1, j + 1));
                }
            }
        }
        OrderCertificate {
            contains_one,
            closed_under_multiplication: closed,
            integral_basis,
            violations,
        }
    }

    fn require_order(&self) -> Result<()> {
        let cert = self.is_order();
        if cert.is_order() {
            Ok(())
        } else {
            Err(Error::NotAnOrder(cert.violations.join("; ")))
        }
    }

    /// `√|det(trd(eᵢ·eⱼ))|`.
    pub fn reduced_discriminant(&self) -> Result<IBig> {
        self.require_order()?;
        let gram = MatrixQ::from_rows(
            self.generators
                .iter()
                .map(|a| self.generators.iter().map(|b| self.params.mul(a, b).trd()).collect())
                .collect(),
        )?;
        let det = gram.det()?.abs();
        let root = det
            .sqrt_exact()
            .and_then(|r| r.to_integer())
            .ok_or_else(|| Error::NotAnOrder(format!("|disc| = {det} is not a square integer")))?;
        Ok(root)
    }

    /// Maximal iff the reduced discriminant equals the product of the
    /// ramified primes. Only meaningful for division algebras.
    pub fn is_maximal(&self) -> Result<bool> {
        self.require_order()?;
        if !self.params.is_indefinite_division() {
            return Err(Error::AlgebraSplit {
                a: self.params.a().to_string(),
                b: self.params.b().to_string(),
            });
        }
        Ok(self.reduced_discriminant()? == self.params.discriminant())
    }

    /// Smallest order containing this lattice and `w`, if it is integral.
    fn adjoin(&self, w: &QuatElement) -> Option<OrderLattice> {
        let mut gens: Vec<QuatElement> = self.generators.clone();
        gens.push(w.clone());
        for _ in 0..8 {
            let lat = OrderLattice::from_generators(self.params.clone(), &gens).ok()?;
            if !lat.generators.iter().all(|g| lat.is_integral(g)) {
                return None;
            }
            let mut products = Vec::new();
            for a in &lat.generators {
                for b in &lat.generators {
                    let p = self.params.mul(a, b);
                    if !lat.contains(&p) {
                        products.push(p);
                    }
                }
            }
            if products.is_empty() {
                return lat.contains(&QuatElement::one()).then_some(lat);
            }
            gens = lat.generators.clone();
            gens.extend(products);
        }
        None
    }

    /// Equivalent basis whose first vector is 1, when 1 is primitive in the
    /// lattice; the displaced generator takes the slot 1 occupied.
    pub fn with_unit_first(&self) -> Result<OrderLattice> {
        let Some(c) = self.integer_coordinates(&QuatElement::one()) else {
            return Ok(self.clone());
        };
        let unit = |x: &IBig| *x == IBig::ONE || *x == -IBig::ONE;
        let mut rows = self.basis.to_rows();
        if unit(&c[0]) {
            rows[0] = QuatElement::one().coords().to_vec();
        } else if let Some(j) = (1..4).rev().find(|&j| unit(&c[j])) {
            rows[j] = rows[0].clone();
            rows[0] = QuatElement::one().coords().to_vec();
        } else {
            return Ok(self.clone());
        }
        OrderLattice::new(self.params.clone(), MatrixQ::from_rows(rows)?)
    }

    /// A maximal order containing this one, found by adjoining integral
    /// elements `v/p` with `p` dividing the index gap.
    pub fn saturate(&self) -> Result<OrderLattice> {
        self.require_order()?;
        let target = self.params.discriminant();
        let mut current = self.clone();
        loop {
            let disc = current.reduced_discriminant()?;
            if disc == target {
                return current.with_unit_first();
            }
            let exhausted = || Error::SearchExhausted {
                reached: disc.to_string(),
                target: target.to_string(),
                basis: format!("{:?}", current.basis),
            };
            if &disc % &target != IBig::ZERO {
                return Err(exhausted());
            }
            let gap = &disc / &target;
            let mut next = None;
            'primes: for p in prime_factors(&gap) {
                let p = p as i64;
                let inv_p = Rational::new(1, p);
                for v in box_points(0, p - 1) {
                    if v == [0; 4] {
                        continue;
                    }
                    let w = current.element(&v).scale(&inv_p);
                    if current.contains(&w) || !current.is_integral(&w) {
                        continue;
                    }
                    if let Some(bigger) = current.adjoin(&w) {
                        next = Some(bigger);
                        break 'primes;
                    }
                }
            }
            match next {
                Some(bigger) => current = bigger,
                None => return Err(exhausted()),
            }
        }
    }

    /// All lattice elements with coordinates in `[-height, height]⁴` and
    /// reduced norm 1, sorted by coordinates. Cost grows as `(2h+1)⁴`.
    pub fn enumerate_units(&self, height: i64) -> Vec<UnitSample> {
        if height < 1 {
            return Vec::new();
        }
        let one = Rational::one();
        box_points(-height, height)
            .filter_map(|c| {
                let e = self.element(&c);
                let n = self.params.nrd(&e);
                (n == one).then(|| {
                    let t = e.trd();
                    let is_elliptic = &t * &t < Rational::from_int(4) * &n;
                    UnitSample {
                        element: e,
                        coords: c,
                        norm: n.to_string(),
                        is_elliptic,
                    }
                })
            })
            .collect()
    }

    /// Units congruent to 1 modulo `level·L` (principal congruence
    /// subgroup), within the same box.
    pub fn congruence_units(&self, height: i64, level: i64) -> Vec<UnitSample> {
        let n = Rational::from_int(level);
        self.enumerate_units(height)
            .into_iter()
            .filter(|u| {
                self.coordinates(&u.element.sub(&QuatElement::one()))
                    .iter()
                    .all(|c| (c / &n).is_integer())
            })
            .collect()
    }

    /// Lattice with the same span and the basis changed by `u` (integer,
    /// unimodular in intended use).
    pub fn change_basis(&self, u: &MatrixQ) -> Result<OrderLattice> {
        OrderLattice::new(self.params.clone(), u.mul(&self.basis)?)
    }
}

/// Integer points of `[lo, hi]⁴` in lexicographic order.
pub fn box_points(lo: i64, hi: i64) -> impl Iterator<Item = [i64; 4]> {
    let r = lo..=hi;
    r.clone().flat_map(move |a| {
        let r = r.clone();
        r.clone().flat_map(move |b| {
            let r = r.clone();
            r.clone().flat_map(move |c| r.clone().map(move |d| [a, b, c, d]))
        })
    })
}

/// The default worked example: the saturated maximal order of `(3, −1)`.
pub fn default_order() -> OrderLattice {
    let params = AlgebraParams::from_ints(3, -1).expect("valid");
    OrderLattice::standard(params).saturate().expect("saturates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> AlgebraParams {
        AlgebraParams::from_ints(3, -1).unwrap()
    }

    #[test]
    fn standard_order_is_an_order() {
        let o = OrderLattice::standard(params());
        assert!(o.is_order().is_order());
        assert_eq!(o.reduced_discriminant().unwrap(), IBig::from(12));
        assert!(!o.is_maximal().unwrap());
    }

    #[test]
    fn half_lattice_is_not_an_order() {
        let basis = MatrixQ::from_rows(
            (0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| if i == j { Rational::new(1, 2) } else { Rational::zero() })
                        .collect()
                })
                .collect(),
        )
        .unwrap();
        let l = OrderLattice::new(params(), basis).unwrap();
        let cert = l.is_order();
        assert!(!cert.is_order());
        assert!(!cert.closed_under_multiplication);
        assert!(matches!(l.reduced_discriminant(), Err(Error::NotAnOrder(_))));
    }

    #[test]
    fn rank_deficient_basis_rejected() {
        let basis = MatrixQ::from_ints(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[1, 1, 1, 0]]).unwrap();
        assert_eq!(
            OrderLattice::new(params(), basis).unwrap_err(),
            Error::DegenerateLattice { rank: 3 }
        );
    }

    /// Brute force over (Z/2)⁴: the integral half-elements of Z⟨1,x,y,xy⟩
    /// that generate an order.
    #[test]
    fn saturation_matches_coset_search() {
        let std = OrderLattice::standard(params());
        let mut integral = Vec::new();
        for v in box_points(0, 1) {
            if v == [0; 4] {
                continue;
            }
            let w = std.element(&v).scale(&Rational::new(1, 2));
            if std.is_integral(&w) {
                integral.push(v);
            }
        }
        // (1+x+y+xy)/2 has trd 1 and nrd (1 - 3 + 1 - 3)/4 = -1
        assert!(integral.contains(&[1, 1, 1, 1]));
        let w = QuatElement::from_ints(1, 1, 1, 1).scale(&Rational::new(1, 2));
        assert_eq!(w.trd(), Rational::one());
        assert_eq!(params().nrd(&w), Rational::from_int(-1));

        let max = std.saturate().unwrap();
        assert!(max.is_order().is_order());
        assert_eq!(max.reduced_discriminant().unwrap(), IBig::from(6));
        assert!(max.is_maximal().unwrap());
        assert!(max.contains(&w));
        for g in std.generators() {
            assert!(max.contains(g));
        }
        let w_half = QuatElement::from_ints(1, 1, 1, 1).scale(&Rational::new(1, 2));
        assert_eq!(max.generators(), &[QuatElement::one(), QuatElement::x(), QuatElement::y(), w_half]);
        let c = |q: &QuatElement| max.integer_coordinates(q).unwrap().map(|v| i64::try_from(v).unwrap());
        assert_eq!(c(&QuatElement::y()), [0, 0, 1, 0]);
        assert_eq!(c(&QuatElement::from_ints(0, 1, 2, 0)), [0, 1, 2, 0]);
        // a maximal order is a fixed point
        assert_eq!(max.saturate().unwrap(), max);
    }

    #[test]
    fn saturation_in_other_algebras() {
        for (a, b) in [(3, -2), (2, -3), (5, -2), (3, -5), (7, -3), (6, -5)] {
            let p = AlgebraParams::from_ints(a, b).unwrap();
            let max = OrderLattice::standard(p.clone()).saturate().unwrap();
            assert!(max.is_order().is_order());
            assert_eq!(max.reduced_discriminant().unwrap(), p.discriminant(), "({a},{b})");
        }
    }

    #[test]
    fn index_two_sublattice_doubles_disc() {
        let max = OrderLattice::standard(params()).saturate().unwrap();
        // doubling the half-integral generator recovers Z⟨1,x,y,xy⟩
        let g = max.generators().to_vec();
        let mut sub = g.clone();
        sub[3] = g[3].scale(&Rational::from_int(2));
        let sub = OrderLattice::from_generators(params(), &sub).unwrap();
        assert!(sub.is_order().is_order());
        assert_eq!(sub.reduced_discriminant().unwrap(), IBig::from(12));
    }

    #[test]
    fn is_maximal_rejects_split_algebras() {
        let split = AlgebraParams::from_ints(2, -1).unwrap();
        let o = OrderLattice::standard(split);
        assert!(matches!(o.is_maximal(), Err(Error::AlgebraSplit { .. })));
    }

    #[test]
    fn units_at_height_one() {
        let max = default_order();
        let units = max.enumerate_units(1);
        let els: Vec<_> = units.iter().map(|u| u.element.clone()).collect();
        for e in [
            QuatElement::one(),
            QuatElement::one().neg(),
            QuatElement::y(),
            QuatElement::y().neg(),
        ] {
            assert!(els.contains(&e), "missing {e}");
        }
        assert!(max.enumerate_units(0).is_empty());
        let mut sorted = units.clone();
        sorted.sort_by_key(|u| u.coords);
        assert_eq!(sorted, units);
    }

    #[test]
    fn unit_invariants() {
        let max = default_order();
        let b = max.params().clone();
        for u in max.enumerate_units(2) {
            assert_eq!(b.mul(&u.element, &u.element.conj()), QuatElement::one());
            assert_eq!(b.embed(&u.element).det(), b.field().one());
            assert!(max.contains(&u.element));
            if u.is_elliptic {
                let t = u.element.trd();
                assert!(t == -1 || t == 0 || t == 1, "trd {t}");
            }
        }
    }

    #[test]
    fn congruence_filter_has_no_elliptic_samples() {
        let max = default_order();
        let gamma3 = max.congruence_units(2, 3);
        assert!(gamma3.iter().any(|u| u.element == QuatElement::one()));
        assert!(gamma3.iter().all(|u| !u.is_elliptic));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn discriminant_is_basis_independent(ops in proptest::collection::vec((0usize..4, 0usize..4, -3i64..=3), 1..6)) {
            let max = default_order();
            let mut u = MatrixQ::identity(4);
            for (i, j, c) in ops {
                if i == j { continue; }
                // elementary row operation row_i += c·row_j
                let mut e = MatrixQ::identity(4);
                e.set(i, j, Rational::from_int(c));
                u = e.mul(&u).unwrap();
            }
            let other = max.change_basis(&u).unwrap();
            prop_assert_eq!(other.reduced_discriminant().unwrap(), IBig::from(6));
        }
    }
}
