//! The modular family over `H₁`: period lattices `O·(τ,1)ᵗ`, the Riemann
//! form, the unit-group action and the factor of automorphy of `T_M`.

use dashu_int::IBig;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::rational::lcm;
use crate::linalg::{numeric_rank, solve_real, Complex, MatrixAP, MatrixQ, QuadExt, Rational, Real};
use crate::orders::{OrderLattice, UnitSample};
use crate::quaternion::{AlgebraParams, NumericAlgebra, QuatElement};

/// Relative threshold for numeric rank decisions.
pub const RANK_TOLERANCE_EXP: u32 = 20;
/// Residual threshold for identities that hold exactly in theory.
pub const RESIDUAL_TOLERANCE_EXP: u32 = 20;
/// Threshold for "nonzero" verdicts.
pub const NONZERO_TOLERANCE_EXP: u32 = 12;

pub(crate) fn fmt_c(z: &Complex) -> String {
    z.to_display_string(30)
}

pub(crate) fn fmt_r(x: &Real) -> String {
    x.to_decimal_string(30)
}

/// `c2·T² + c1·T + c0 = 0` over Q(√a).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticData {
    pub c2: QuadExt,
    pub c1: QuadExt,
    pub c0: QuadExt,
}

impl QuadraticData {
    /// Same polynomial scaled to leading coefficient 1.
    pub fn monic(&self) -> QuadraticData {
        let inv = self.c2.recip();
        QuadraticData {
            c2: self.c2.field().one(),
            c1: &self.c1 * &inv,
            c0: &self.c0 * &inv,
        }
    }

    pub fn to_strings(&self) -> [String; 3] {
        [self.c2.to_string(), self.c1.to_string(), self.c0.to_string()]
    }
}

/// Point of the upper half plane, optionally with the exact quadratic
/// equation it solves.
#[derive(Clone, Debug)]
pub struct UpperHalfPoint {
    tau: Complex,
    exact: Option<QuadraticData>,
}

impl UpperHalfPoint {
    pub fn new(tau: Complex) -> Result<Self> {
        if !tau.im.is_positive() {
            return Err(Error::NotInUpperHalfPlane(fmt_c(&tau)));
        }
        Ok(UpperHalfPoint { tau, exact: None })
    }

    pub fn from_f64(re: f64, im: f64, prec: usize) -> Result<Self> {
        UpperHalfPoint::new(Complex::new(Real::from_f64(re, prec), Real::from_f64(im, prec)))
    }

    pub fn from_rationals(re: &Rational, im: &Rational, prec: usize) -> Result<Self> {
        UpperHalfPoint::new(Complex::from_rationals(re, im, prec))
    }

    pub fn i(prec: usize) -> Self {
        UpperHalfPoint::new(Complex::i(prec)).expect("i is in H")
    }

    pub fn with_exact(mut self, q: QuadraticData) -> Self {
        self.exact = Some(q);
        self
    }

    pub fn tau(&self) -> &Complex {
        &self.tau
    }

    pub fn exact(&self) -> Option<&QuadraticData> {
        self.exact.as_ref()
    }

    pub fn precision(&self) -> usize {
        self.tau.precision()
    }
}

/// `embed(m)·(τ,1)ᵗ`.
pub fn complex_structure(num: &NumericAlgebra, m: &QuatElement, tau: &Complex) -> [Complex; 2] {
    num.apply(m, tau)
}

fn to_real4(v: &[Complex; 2]) -> [Real; 4] {
    [v[0].re.clone(), v[0].im.clone(), v[1].re.clone(), v[1].im.clone()]
}

/// The lattice `O_B·(τ,1)ᵗ ⊂ C²`.
#[derive(Clone, Debug)]
pub struct PeriodLattice {
    pub tau: UpperHalfPoint,
    pub elements: Vec<QuatElement>,
    pub vectors: Vec<[Complex; 2]>,
}

impl PeriodLattice {
    pub fn new(order: &OrderLattice, num: &NumericAlgebra, tau: &UpperHalfPoint) -> Result<Self> {
        PeriodLattice::from_elements(order.generators().to_vec(), num, tau)
    }

    /// Lattice spanned by the images of four arbitrary elements; fails with
    /// `DegenerateLattice` unless they are R-independent in C².
    pub fn from_elements(elements: Vec<QuatElement>, num: &NumericAlgebra, tau: &UpperHalfPoint) -> Result<Self> {
        if elements.len() != 4 {
            return Err(Error::DimensionMismatch(format!("expected 4 generators, got {}", elements.len())));
        }
        let vectors: Vec<[Complex; 2]> = elements.iter().map(|e| num.apply(e, tau.tau())).collect();
        let rank = numeric_rank(&real_period_matrix(&vectors)?, &Rational::one().recip_pow10(RANK_TOLERANCE_EXP))?;
        if rank < 4 {
            return Err(Error::DegenerateLattice { rank });
        }
        Ok(PeriodLattice {
            tau: tau.clone(),
            elements,
            vectors,
        })
    }
}

/// Rows `(Re v₁, Im v₁, Re v₂, Im v₂)`, as a complex matrix with zero
/// imaginary parts.
pub fn real_period_matrix(vectors: &[[Complex; 2]]) -> Result<MatrixAP> {
    MatrixAP::from_rows(
        vectors
            .iter()
            .map(|v| to_real4(v).into_iter().map(Complex::from_real).collect())
            .collect(),
    )
}

/// `trd(ρ·m₁·m₂′)`.
pub fn riemann_form(params: &AlgebraParams, rho: &QuatElement, m1: &QuatElement, m2: &QuatElement) -> Rational {
    params.mul(&params.mul(rho, m1), &m2.conj()).trd()
}

/// Gram matrix of the Riemann form on the order basis.
pub fn riemann_form_matrix(order: &OrderLattice, rho: &QuatElement) -> Result<MatrixQ> {
    let g = order.generators();
    MatrixQ::from_rows(
        g.iter()
            .map(|a| g.iter().map(|b| riemann_form(order.params(), rho, a, b)).collect())
            .collect(),
    )
}

/// `E(m₁γ, m₂γ) = E(m₁, m₂)` in exact arithmetic.
pub fn e_invariant_under(params: &AlgebraParams, rho: &QuatElement, m1: &QuatElement, m2: &QuatElement, gamma: &QuatElement) -> bool {
    riemann_form(params, rho, &params.mul(m1, gamma), &params.mul(m2, gamma)) == riemann_form(params, rho, m1, m2)
}

/// Polarization element `ρ` (pure, `ρ² < 0`) and the scale making the form
/// integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarizationData {
    pub rho: QuatElement,
    pub scale: Rational,
}

impl PolarizationData {
    /// Validates `ρ` and picks the minimal scale: the lcm of the
    /// denominators of `E` on pairs of basis elements.
    pub fn new(order: &OrderLattice, rho: QuatElement) -> Result<Self> {
        validate_rho(order.params(), &rho)?;
        let gram = riemann_form_matrix(order, &rho)?;
        let den = gram.common_denominator();
        Ok(PolarizationData {
            rho,
            scale: Rational::from_ibig(den),
        })
    }

    /// Explicit scale; integrality is not enforced here.
    pub fn with_scale(order: &OrderLattice, rho: QuatElement, scale: Rational) -> Result<Self> {
        validate_rho(order.params(), &rho)?;
        if !scale.is_positive() {
            return Err(Error::InvalidPolarization(format!("scale {scale} must be positive")));
        }
        Ok(PolarizationData { rho, scale })
    }

    /// `ρ = y`, valid in every algebra with `b < 0`.
    pub fn default_for(order: &OrderLattice) -> Result<Self> {
        PolarizationData::new(order, QuatElement::y())
    }
}

fn validate_rho(params: &AlgebraParams, rho: &QuatElement) -> Result<()> {
    if !rho.k.is_zero() {
        return Err(Error::InvalidPolarization(format!("ρ = {rho} is not pure (ρ′ ≠ −ρ)")));
    }
    let n = params.nrd(rho);
    if !n.is_positive() {
        return Err(Error::InvalidPolarization(format!("ρ² = {} is not negative", -n)));
    }
    Ok(())
}

type Mat2 = [[Real; 2]; 2];

fn m2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn m2_adj(m: &Mat2) -> Mat2 {
    [[m[1][1].clone(), -&m[0][1]], [-&m[1][0], m[0][0].clone()]]
}

fn m2_trace(m: &Mat2) -> Real {
    &m[0][0] + &m[1][1]
}

/// The form `E` extended to `M₂(R)`.
fn e_real(r: &Mat2, m1: &Mat2, m2: &Mat2) -> Real {
    m2_trace(&m2_mul(&m2_mul(r, m1), &m2_adj(m2)))
}

/// Real matrix `J_τ` with `J_τ·(τ,1)ᵗ = i·(τ,1)ᵗ`; multiplication by `i`
/// on C² is `m ↦ m·J_τ` on `M₂(R)`.
pub fn complex_structure_matrix(tau: &Complex) -> [[Real; 2]; 2] {
    let inv = tau.im.recip();
    [[&tau.re * &inv, -(tau.norm_sqr() * &inv)], [inv.clone(), -(&tau.re * &inv)]]
}

/// Pass/fail with a human-readable witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionOutcome {
    pub passed: bool,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RiemannReport {
    pub tau: String,
    pub rho: String,
    pub scale: String,
    /// `scale·E` integral on basis pairs.
    pub integrality: ConditionOutcome,
    /// `E(Jm₁, Jm₂) = E(m₁, m₂)`.
    pub compatibility: ConditionOutcome,
    /// `H` positive definite.
    pub positivity: ConditionOutcome,
    pub leading_minors: [String; 2],
    /// Determinant of `E` on the order basis (nonzero = non-degenerate).
    pub gram_determinant: String,
}

impl RiemannReport {
    pub fn all_passed(&self) -> bool {
        self.integrality.passed && self.compatibility.passed && self.positivity.passed
    }
}

/// Hermitian Gram matrix of `H(v, w) = E(v, Jw) − i·E(v, w)` on the
/// standard basis of C².
pub fn hermitian_gram(num: &NumericAlgebra, rho: &QuatElement, tau: &Complex) -> [[Complex; 2]; 2] {
    let prec = num.precision();
    let r = num.matrix(rho);
    let j = complex_structure_matrix(tau);
    let z = Real::zero(prec);
    let o = Real::one(prec);
    // preimages of e₁, e₂ under m ↦ m·(τ,1)ᵗ
    let basis: [Mat2; 2] = [[[z.clone(), o.clone()], [z.clone(), z.clone()]], [[z.clone(), z.clone()], [z, o]]];
    let h = |v: &Mat2, w: &Mat2| Complex::new(e_real(&r, v, &m2_mul(w, &j)), -e_real(&r, v, w));
    [
        [h(&basis[0], &basis[0]), h(&basis[0], &basis[1])],
        [h(&basis[1], &basis[0]), h(&basis[1], &basis[1])],
    ]
}

pub fn riemann_conditions_check(
    lattice: &PeriodLattice,
    order: &OrderLattice,
    num: &NumericAlgebra,
    pol: &PolarizationData,
) -> Result<RiemannReport> {
    let params = order.params();
    let prec = num.precision();
    let elems = &lattice.elements;

    let mut integrality = ConditionOutcome {
        passed: true,
        witness: "all basis pairs integral".into(),
    };
    'outer: for (i, a) in elems.iter().enumerate() {
        for (j, b) in elems.iter().enumerate() {
            let v = &pol.scale * &riemann_form(params, &pol.rho, a, b);
            if !v.is_integer() {
                integrality = ConditionOutcome {
                    passed: false,
                    witness: format!("scale·E(e{}, e{}) = {v}", i + 1, j + 1),
                };
                break 'outer;
            }
        }
    }

    let r = num.matrix(&pol.rho);
    let jm = complex_structure_matrix(lattice.tau.tau());
    let mats: Vec<Mat2> = elems.iter().map(|e| num.matrix(e)).collect();
    let mut worst = Real::zero(prec);
    let mut worst_pair = (0, 0);
    for (i, a) in mats.iter().enumerate() {
        for (j, b) in mats.iter().enumerate() {
            let lhs = e_real(&r, &m2_mul(a, &jm), &m2_mul(b, &jm));
            let d = (lhs - e_real(&r, a, b)).abs();
            if d > worst {
                worst = d;
                worst_pair = (i, j);
            }
        }
    }
    let tol = Real::pow10_neg(RESIDUAL_TOLERANCE_EXP, prec);
    let compatibility = ConditionOutcome {
        passed: worst < tol,
        witness: format!("max residual {} at (e{}, e{})", fmt_r(&worst), worst_pair.0 + 1, worst_pair.1 + 1),
    };

    let g = hermitian_gram(num, &pol.rho, lattice.tau.tau());
    let m1 = g[0][0].re.clone();
    let m2 = (&(&g[0][0] * &g[1][1]) - &(&g[0][1] * &g[1][0])).re;
    let pos_tol = Real::pow10_neg(NONZERO_TOLERANCE_EXP, prec);
    let positivity = ConditionOutcome {
        passed: m1 > pos_tol && m2 > pos_tol,
        witness: format!("leading minors {} and {}", fmt_r(&m1), fmt_r(&m2)),
    };

    let gram = MatrixQ::from_rows(
        elems
            .iter()
            .map(|a| elems.iter().map(|b| riemann_form(params, &pol.rho, a, b)).collect())
            .collect(),
    )?;
    Ok(RiemannReport {
        tau: fmt_c(lattice.tau.tau()),
        rho: pol.rho.to_string(),
        scale: pol.scale.to_string(),
        integrality,
        compatibility,
        positivity,
        leading_minors: [fmt_r(&m1), fmt_r(&m2)],
        gram_determinant: gram.det()?.to_string(),
    })
}

/// `(aτ + b)/(cτ + d)`.
pub fn moebius_act(num: &NumericAlgebra, gamma: &QuatElement, tau: &UpperHalfPoint) -> Result<UpperHalfPoint> {
    let [num_, den] = num.apply(gamma, tau.tau());
    UpperHalfPoint::new(&num_ / &den)
}

/// `c·τ + d` for `embed(γ) = [[a, b], [c, d]]`.
pub fn j_factor(num: &NumericAlgebra, gamma: &QuatElement, tau: &Complex) -> Complex {
    num.apply(gamma, tau)[1].clone()
}

#[derive(Clone, Debug)]
pub struct NumericCheck {
    pub passed: bool,
    pub residual: Real,
}

/// Coordinates of `targets` in the R-basis `basis` of C²; returns the
/// largest distance of a coordinate from the nearest integer.
fn integrality_defect(basis: &[[Complex; 2]], targets: &[[Complex; 2]]) -> Result<Real> {
    let cols: Vec<[Real; 4]> = basis.iter().map(to_real4).collect();
    let a: Vec<Vec<Real>> = (0..4).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    let prec = basis[0][0].precision();
    let mut worst = Real::zero(prec);
    for t in targets {
        let x = solve_real(&a, &to_real4(t))?;
        for c in x {
            let d = (&c - Real::from_ibig(&c.round_to_int(), prec)).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// `O·(γτ, 1)ᵗ = (cτ + d)⁻¹·O·(τ, 1)ᵗ` as lattices, verified by integer
/// coordinates in both directions.
pub fn isogeny_lattice_check(
    order: &OrderLattice,
    num: &NumericAlgebra,
    gamma: &QuatElement,
    tau: &UpperHalfPoint,
) -> Result<NumericCheck> {
    let gt = moebius_act(num, gamma, tau)?;
    let j = j_factor(num, gamma, tau.tau());
    let jinv = j.recip();
    let left: Vec<[Complex; 2]> = order.generators().iter().map(|g| num.apply(g, gt.tau())).collect();
    let right: Vec<[Complex; 2]> = order
        .generators()
        .iter()
        .map(|g| {
            let v = num.apply(g, tau.tau());
            [&v[0] * &jinv, &v[1] * &jinv]
        })
        .collect();
    let d1 = integrality_defect(&left, &right)?;
    let d2 = integrality_defect(&right, &left)?;
    let residual = d1.max(d2);
    let tol = Real::pow10_neg(RESIDUAL_TOLERANCE_EXP, num.precision());
    Ok(NumericCheck {
        passed: residual < tol,
        residual,
    })
}

/// `γ_λ = [[1, λ], [0, γ]]` with `λ ∈ O` and `γ` a unit of norm one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyGroupElement {
    pub lambda: QuatElement,
    pub gamma: QuatElement,
}

impl FamilyGroupElement {
    pub fn new(order: &OrderLattice, lambda: QuatElement, gamma: QuatElement) -> Result<Self> {
        if !order.contains(&lambda) {
            return Err(Error::NotInOrder(format!("λ = {lambda}")));
        }
        if !order.contains(&gamma) {
            return Err(Error::NotInOrder(format!("γ = {gamma}")));
        }
        if order.params().nrd(&gamma) != 1 {
            return Err(Error::NotInOrder(format!("γ = {gamma} has norm {}", order.params().nrd(&gamma))));
        }
        Ok(FamilyGroupElement { lambda, gamma })
    }

    pub fn from_unit(order: &OrderLattice, lambda: QuatElement, unit: &UnitSample) -> Result<Self> {
        FamilyGroupElement::new(order, lambda, unit.element.clone())
    }

    pub fn identity() -> Self {
        FamilyGroupElement {
            lambda: QuatElement::zero(),
            gamma: QuatElement::one(),
        }
    }

    /// `self ∘ other`, so that `(g₁g₂)·x = g₁·(g₂·x)`.
    pub fn compose(&self, params: &AlgebraParams, other: &Self) -> Self {
        FamilyGroupElement {
            lambda: other.lambda.add(&params.mul(&self.lambda, &other.gamma)),
            gamma: params.mul(&self.gamma, &other.gamma),
        }
    }

    pub fn inverse(&self, params: &AlgebraParams) -> Self {
        let ginv = self.gamma.conj(); // nrd γ = 1
        FamilyGroupElement {
            lambda: params.mul(&self.lambda, &ginv).neg(),
            gamma: ginv,
        }
    }

    /// `((z + λ_τ)/(cτ + d), γτ)`.
    pub fn act(&self, num: &NumericAlgebra, z: &[Complex; 2], tau: &UpperHalfPoint) -> Result<([Complex; 2], UpperHalfPoint)> {
        let lt = num.apply(&self.lambda, tau.tau());
        let jinv = j_factor(num, &self.gamma, tau.tau()).recip();
        let nz = [&(&z[0] + &lt[0]) * &jinv, &(&z[1] + &lt[1]) * &jinv];
        Ok((nz, moebius_act(num, &self.gamma, tau)?))
    }
}

/// Jacobian of `g` at `(z, τ)`:
/// `(cτ+d)⁻¹·[[1₂, ₁λ − c(z + λ_τ)/(cτ+d)], [0, (cτ+d)⁻¹]]`.
pub fn automorphy_factor(num: &NumericAlgebra, g: &FamilyGroupElement, z: &[Complex; 2], tau: &UpperHalfPoint) -> MatrixAP {
    let prec = num.precision();
    let t = tau.tau();
    let gm = num.matrix(&g.gamma);
    let c = Complex::from_real(gm[1][0].clone());
    let j = j_factor(num, &g.gamma, t);
    let jinv = j.recip();
    let lt = num.apply(&g.lambda, t);
    let lm = num.matrix(&g.lambda);
    let mut a = MatrixAP::zeros(3, 3, prec);
    a.set(0, 0, jinv.clone());
    a.set(1, 1, jinv.clone());
    for r in 0..2 {
        let first_col = Complex::from_real(lm[r][0].clone());
        let shift = &(&c * &(&z[r] + &lt[r])) * &jinv;
        a.set(r, 2, &(&first_col - &shift) * &jinv);
    }
    a.set(2, 2, &jinv * &jinv);
    a
}

fn max_abs_diff(a: &MatrixAP, b: &MatrixAP) -> Result<Real> {
    Ok(a.sub(b)?.max_abs())
}

/// `a(g₁g₂, x) = a(g₁, g₂x)·a(g₂, x)`.
pub fn cocycle_check(
    num: &NumericAlgebra,
    g1: &FamilyGroupElement,
    g2: &FamilyGroupElement,
    z: &[Complex; 2],
    tau: &UpperHalfPoint,
    tol: &Real,
) -> Result<NumericCheck> {
    let g12 = g1.compose(&num.params, g2);
    let lhs = automorphy_factor(num, &g12, z, tau);
    let (z2, t2) = g2.act(num, z, tau)?;
    let rhs = automorphy_factor(num, g1, &z2, &t2).mul(&automorphy_factor(num, g2, z, tau))?;
    let residual = max_abs_diff(&lhs, &rhs)?;
    Ok(NumericCheck {
        passed: residual < *tol,
        residual,
    })
}

/// `det a(g, x) = (cτ + d)⁻⁴`.
pub fn canonical_degree_check(
    num: &NumericAlgebra,
    g: &FamilyGroupElement,
    z: &[Complex; 2],
    tau: &UpperHalfPoint,
    tol: &Real,
) -> Result<NumericCheck> {
    let det = automorphy_factor(num, g, z, tau).det()?;
    let jinv = j_factor(num, &g.gamma, tau.tau()).recip();
    let j2 = &jinv * &jinv;
    let expected = &j2 * &j2;
    let residual = (&det - &expected).abs();
    Ok(NumericCheck {
        passed: residual < *tol,
        residual,
    })
}

/// Exact lcm of the denominators in a list of rationals.
pub fn denominators_lcm(values: &[Rational]) -> IBig {
    values.iter().fold(IBig::ONE, |acc, v| lcm(&acc, &v.denom()))
}
