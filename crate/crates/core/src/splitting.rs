//! Flat-bundle section spaces on fibers and on elliptic curves in fibers,
//! the resulting splitting verdicts, and the candidate classifier.
//!
//! A lattice generator `g` with vector `v_g` acts by
//! `ρ(g) = [[1, 0], [−v_gᵗ, 1]]`. Sections have the form
//! `f(z) = (f, a·z + b)` with constant `f`; invariance
//! `f(z + p_g) = ρ(g)·f(z)` reduces to the linear system
//! `v_g·f + p_g·a = 0` over all generators, and `b` is free.

use serde::Serialize;

use crate::cm_points::CMPoint;
use crate::error::{Error, Result};
use crate::family::{fmt_c, fmt_r, PeriodLattice, UpperHalfPoint, NONZERO_TOLERANCE_EXP, RANK_TOLERANCE_EXP};
use crate::linalg::{exact_rank, numeric_nullspace, Complex, MatrixAP, MatrixExact, QuadExt, Rational, Real};
use crate::orders::OrderLattice;
use crate::quaternion::{AlgebraParams, NumericAlgebra, QuatElement};

/// Generator vectors and periods of a unipotent flat representation.
#[derive(Clone, Debug)]
pub struct FlatRep {
    pub generator_vectors: Vec<Vec<Complex>>,
    pub lattice_periods: Vec<Vec<Complex>>,
}

impl FlatRep {
    pub fn rank(&self) -> usize {
        self.generator_vectors.first().map_or(0, Vec::len)
    }

    pub fn period_dim(&self) -> usize {
        self.lattice_periods.first().map_or(0, Vec::len)
    }

    /// `ρ(g)` as a matrix.
    pub fn rho(&self, g: usize) -> MatrixAP {
        unipotent_numeric(&self.generator_vectors[g])
    }

    /// Rows `(v_g, p_g)` of the invariance system in `(f, a)`.
    pub fn system(&self) -> Result<MatrixAP> {
        MatrixAP::from_rows(
            self.generator_vectors
                .iter()
                .zip(&self.lattice_periods)
                .map(|(v, p)| v.iter().chain(p).cloned().collect())
                .collect(),
        )
    }
}

fn unipotent_numeric(v: &[Complex]) -> MatrixAP {
    let k = v.len();
    let prec = v.first().map_or(64, Complex::precision);
    let mut m = MatrixAP::identity(k + 1, prec);
    for (j, x) in v.iter().enumerate() {
        m.set(k, j, -x);
    }
    m
}

/// `[[1, 0], [−vᵗ, 1]]` over Q(√a).
pub fn unipotent_exact(v: &[QuadExt]) -> MatrixExact<QuadExt> {
    let k = v.len();
    let f = v[0].field();
    let rows = (0..=k)
        .map(|i| {
            (0..=k)
                .map(|j| {
                    if i == j {
                        f.one()
                    } else if i == k {
                        -&v[j]
                    } else {
                        f.zero()
                    }
                })
                .collect()
        })
        .collect();
    MatrixExact::from_rows(rows).expect("square")
}

/// Exact first columns of `embed(λᵢ)`.
pub fn fiber_vectors_exact(params: &AlgebraParams, elements: &[QuatElement]) -> Vec<[QuadExt; 2]> {
    elements.iter().map(|e| params.embed(e).first_column()).collect()
}

/// `ρ(λ₁ + λ₂) = ρ(λ₁)·ρ(λ₂)`, exactly.
pub fn fiber_rep_homomorphism(params: &AlgebraParams, l1: &QuatElement, l2: &QuatElement) -> bool {
    let v = |l: &QuatElement| params.embed(l).first_column();
    let lhs = unipotent_exact(&v(&l1.add(l2)));
    let rhs = unipotent_exact(&v(l1)).mul(&unipotent_exact(&v(l2))).expect("3x3");
    lhs == rhs
}

/// `ρ(mτ′ + n) = ρ(τ′)^m·ρ(1)^n`, exactly.
pub fn curve_rep_homomorphism(params: &AlgebraParams, mu: &QuatElement, m: i64, n: i64) -> bool {
    let f = params.field();
    let vt = params.embed(mu).first_column();
    let v1 = [f.one(), f.zero()];
    let combined: Vec<QuadExt> = (0..2)
        .map(|i| &vt[i].scale(&Rational::from_int(m)) + &v1[i].scale(&Rational::from_int(n)))
        .collect();
    let pow = |base: &MatrixExact<QuadExt>, e: i64| {
        let b = if e < 0 { base.inverse().expect("unipotent") } else { base.clone() };
        (0..e.unsigned_abs()).fold(unipotent_exact(&[f.zero(), f.zero()]), |acc, _| acc.mul(&b).expect("3x3"))
    };
    let lhs = unipotent_exact(&combined);
    let rhs = pow(&unipotent_exact(&vt), m).mul(&pow(&unipotent_exact(&v1), n)).expect("3x3");
    lhs == rhs
}

/// For each generator `λᵢ`: `v = ₁λᵢ`, period `λᵢ·(τ,1)ᵗ`.
pub fn fiber_rep(lattice: &PeriodLattice, num: &NumericAlgebra) -> FlatRep {
    FlatRep {
        generator_vectors: lattice
            .elements
            .iter()
            .map(|e| {
                let m = num.matrix(e);
                vec![Complex::from_real(m[0][0].clone()), Complex::from_real(m[1][0].clone())]
            })
            .collect(),
        lattice_periods: lattice.vectors.iter().map(|v| v.to_vec()).collect(),
    }
}

/// Generators `τ′` (vector `₁μ`) and `1` (vector `(1, 0)`) of the lattice
/// `Zτ′ + Z` of `E_{τ′}`.
pub fn curve_rep(num: &NumericAlgebra, mu: &QuatElement, tau_prime: &Complex) -> FlatRep {
    let prec = num.precision();
    let m = num.matrix(mu);
    FlatRep {
        generator_vectors: vec![
            vec![Complex::from_real(m[0][0].clone()), Complex::from_real(m[1][0].clone())],
            vec![Complex::one(prec), Complex::zero(prec)],
        ],
        lattice_periods: vec![vec![tau_prime.clone()], vec![Complex::one(prec)]],
    }
}

/// `z ↦ (f, a·z + b)`.
#[derive(Clone, Debug)]
pub struct Section {
    pub f: Vec<Complex>,
    pub a: Vec<Complex>,
    pub b: Complex,
}

impl Section {
    pub fn evaluate(&self, z: &[Complex]) -> Vec<Complex> {
        let lin = self.a.iter().zip(z).fold(self.b.clone(), |acc, (a, z)| &acc + &(a * z));
        self.f.iter().cloned().chain(std::iter::once(lin)).collect()
    }

    pub fn is_constant_normal(&self) -> bool {
        self.f.iter().chain(&self.a).all(Complex::is_zero)
    }

    /// `‖f(z + p_g) − ρ(g)·f(z)‖` maximized over generators and points.
    pub fn invariance_residual(&self, rep: &FlatRep, points: &[Vec<Complex>]) -> Result<Real> {
        let prec = self.b.precision();
        let mut worst = Real::zero(prec);
        for (g, p) in rep.lattice_periods.iter().enumerate() {
            let rho = rep.rho(g);
            for z in points {
                let shifted: Vec<Complex> = z.iter().zip(p).map(|(a, b)| a + b).collect();
                let lhs = self.evaluate(&shifted);
                let rhs = rho.mul_vec(&self.evaluate(z))?;
                for (l, r) in lhs.iter().zip(&rhs) {
                    worst = worst.max((l - r).abs());
                }
            }
        }
        Ok(worst)
    }

    pub fn summary(&self) -> SectionSummary {
        let mut components: Vec<String> = self.f.iter().map(fmt_c).collect();
        let mut lin: Vec<String> = self
            .a
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| {
                format!(
                    "({})·z{}",
                    fmt_c(a),
                    if self.a.len() == 1 { String::new() } else { (i + 1).to_string() }
                )
            })
            .collect();
        if !self.b.is_zero() || lin.is_empty() {
            lin.push(fmt_c(&self.b));
        }
        components.push(lin.join(" + "));
        SectionSummary { components }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectionSummary {
    pub components: Vec<String>,
}

/// `h⁰ = 1 + nullity`, with basis `{(0, 1)} ∪` normalized null vectors.
fn solve_sections(rep: &FlatRep) -> Result<(usize, Vec<Section>)> {
    let sys = rep.system()?;
    let prec = sys.precision();
    let null = numeric_nullspace(&sys, &Rational::one().recip_pow10(RANK_TOLERANCE_EXP))?;
    let k = rep.rank();
    let mut sections = vec![Section {
        f: vec![Complex::zero(prec); k],
        a: vec![Complex::zero(prec); rep.period_dim()],
        b: Complex::one(prec),
    }];
    let small = Real::pow10_neg(RANK_TOLERANCE_EXP, prec);
    for v in &null {
        let pivot = v.iter().find(|x| x.abs() > small).expect("unit vector").recip();
        let mut w: Vec<Complex> = v.iter().map(|x| x * &pivot).collect();
        for x in &mut w {
            if x.abs() < small {
                *x = Complex::zero(prec);
            }
        }
        let a = w.split_off(k);
        sections.push(Section {
            f: w,
            a,
            b: Complex::zero(prec),
        });
    }
    Ok((1 + null.len(), sections))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SubjectKind {
    Fiber,
    EllipticInFiber,
    EtaleMultisection,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Split,
    NonSplit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Determinant {
        direct: String,
        factored: String,
        precision: usize,
    },
    Sections {
        sections: Vec<SectionSummary>,
        eigenvector: [String; 2],
        eigen_residual: String,
    },
    Classification {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplittingReport {
    pub subject: SubjectKind,
    pub h0: Option<usize>,
    pub verdict: Verdict,
    pub certificate: Certificate,
    pub dphi_value: Option<String>,
    pub citations: Vec<String>,
}

fn within_recheck_band(value: &Real, threshold: &Real) -> bool {
    let k = Real::from_int(1000, value.precision());
    *value < &k * threshold && *value > threshold / &k
}

/// Result of [`fiber_h0`].
#[derive(Clone, Debug)]
pub struct FiberH0 {
    pub h0: usize,
    pub rep: FlatRep,
    pub sections: Vec<Section>,
    /// `|det|` of the 4×4 system.
    pub det_abs: Real,
    /// Exact determinant of the real basis matrix (the τ-block is unit
    /// triangular).
    pub det_factored: QuadExt,
    /// Precision at which the nonzero verdict was settled.
    pub precision: usize,
}

impl FiberH0 {
    pub fn det_nonzero(&self) -> bool {
        self.det_abs > Real::pow10_neg(NONZERO_TOLERANCE_EXP, self.det_abs.precision())
    }

    pub fn report(&self) -> SplittingReport {
        SplittingReport {
            subject: SubjectKind::Fiber,
            h0: Some(self.h0),
            verdict: if self.h0 == 1 { Verdict::NonSplit } else { Verdict::Split },
            certificate: Certificate::Determinant {
                direct: fmt_r(&self.det_abs),
                factored: self.det_factored.to_string(),
                precision: self.precision,
            },
            dphi_value: None,
            citations: vec![FIBER_CITATION.to_string()],
        }
    }
}

pub const FIBER_CITATION: &str = "a fiber A_τ never splits: the invariance system for the flat cotangent bundle has nonzero determinant because the order generators are R-independent";
pub const CURVE_CITATION: &str = "an elliptic curve E_τ′ inside a CM fiber splits: h⁰ = 2 and dφ is surjective";
pub const SURFACE_CITATION: &str =
    "a splitting surface that is not a fiber would be a ball quotient or torus quotient mapping onto C; both are excluded by hyperbolicity";

/// Rows `(λᵢ₁₁, λᵢ₂₁, λᵢ₁₂, λᵢ₂₂)` over Q(√a).
fn real_basis_matrix(params: &AlgebraParams, elements: &[QuatElement]) -> Result<MatrixExact<QuadExt>> {
    MatrixExact::from_rows(
        elements
            .iter()
            .map(|e| {
                let m = params.embed(e).0;
                vec![m[0][0].clone(), m[1][0].clone(), m[0][1].clone(), m[1][1].clone()]
            })
            .collect(),
    )
}

/// `h⁰(A_τ, ι*Ω¹_M)` for the order at `τ`.
pub fn fiber_h0(order: &OrderLattice, num: &NumericAlgebra, tau: &UpperHalfPoint) -> Result<FiberH0> {
    fiber_h0_for_elements(order.generators(), num, tau)
}

/// As [`fiber_h0`] for an arbitrary list of four generators.
pub fn fiber_h0_for_elements(elements: &[QuatElement], num: &NumericAlgebra, tau: &UpperHalfPoint) -> Result<FiberH0> {
    let params = &num.params;
    let basis = real_basis_matrix(params, elements)?;
    let rank = exact_rank(&basis);
    if rank < 4 {
        return Err(Error::DegenerateLattice { rank });
    }
    let det_factored = basis.det()?;
    let mut prec = num.precision();
    loop {
        let num_p = params.numeric(prec);
        let t = UpperHalfPoint::new(tau.tau().with_precision(prec))?;
        let lattice = PeriodLattice::from_elements(elements.to_vec(), &num_p, &t)?;
        let rep = fiber_rep(&lattice, &num_p);
        let det_abs = rep.system()?.det()?.abs();
        let threshold = Real::pow10_neg(NONZERO_TOLERANCE_EXP, prec);
        if within_recheck_band(&det_abs, &threshold) && prec < 4 * num.precision() {
            prec *= 2;
            continue;
        }
        let (h0, sections) = solve_sections(&rep)?;
        return Ok(FiberH0 {
            h0,
            rep,
            sections,
            det_abs,
            det_factored,
            precision: prec,
        });
    }
}

/// Result of [`curve_h0`].
#[derive(Clone, Debug)]
pub struct CurveH0 {
    pub h0: usize,
    pub rep: FlatRep,
    /// `(0, 0, 1)` first, then the extended eigenvector solutions.
    pub sections: Vec<Section>,
    /// `(f₁, f₂)` normalized to first nonzero coordinate 1.
    pub eigenvector: [Complex; 2],
    /// `‖embed(μ)ᵗ·v − τ′·v‖`.
    pub eigen_residual: Real,
    pub dphi: Complex,
    pub precision: usize,
}

impl CurveH0 {
    pub fn dphi_nonzero(&self) -> bool {
        self.dphi.abs() > Real::pow10_neg(NONZERO_TOLERANCE_EXP, self.dphi.precision())
    }

    pub fn report(&self) -> SplittingReport {
        let split = self.h0 == 2 && self.dphi_nonzero();
        SplittingReport {
            subject: SubjectKind::EllipticInFiber,
            h0: Some(self.h0),
            verdict: if split { Verdict::Split } else { Verdict::NonSplit },
            certificate: Certificate::Sections {
                sections: self.sections.iter().map(Section::summary).collect(),
                eigenvector: [fmt_c(&self.eigenvector[0]), fmt_c(&self.eigenvector[1])],
                eigen_residual: fmt_r(&self.eigen_residual),
            },
            dphi_value: Some(fmt_c(&self.dphi)),
            citations: vec![CURVE_CITATION.to_string()],
        }
    }
}

/// `z ↦ f₁τ′ + f₂` applied to the constant part of a section.
pub fn dphi_check(section: &Section, tau_prime: &Complex) -> Complex {
    &(&section.f[0] * tau_prime) + &section.f[1]
}

/// `h⁰(E_{τ′}, φ*Ω¹_M)` for a CM point.
pub fn curve_h0(cm: &CMPoint) -> Result<CurveH0> {
    let base = cm.tau_prime.precision();
    let mut prec = base;
    loop {
        let num = cm.params.numeric(prec);
        let point = if prec == base {
            cm.clone()
        } else {
            CMPoint::new(&num, cm.mu.clone())?
        };
        let rep = curve_rep(&num, &point.mu, &point.tau_prime);
        let (h0, sections) = solve_sections(&rep)?;
        let extra = sections
            .iter()
            .find(|s| !s.is_constant_normal())
            .ok_or_else(|| Error::EigenMismatch(format!("no eigenvector solution for μ = {}", point.mu)))?;
        let eigenvector = [extra.f[0].clone(), extra.f[1].clone()];
        let m = num.matrix(&point.mu);
        let tp = &point.tau_prime;
        let mut eigen_residual = Real::zero(prec);
        for i in 0..2 {
            // (embed(μ)ᵗ v)_i = Σ_j μ_ji v_j
            let lhs = &eigenvector[0].scale(&m[0][i]) + &eigenvector[1].scale(&m[1][i]);
            eigen_residual = eigen_residual.max((&lhs - &(tp * &eigenvector[i])).abs());
        }
        let dphi = dphi_check(extra, tp);
        let threshold = Real::pow10_neg(NONZERO_TOLERANCE_EXP, prec);
        if within_recheck_band(&dphi.abs(), &threshold) && prec < 4 * base {
            prec *= 2;
            continue;
        }
        return Ok(CurveH0 {
            h0,
            rep,
            sections,
            eigenvector,
            eigen_residual,
            dphi,
            precision: prec,
        });
    }
}

/// `h⁰` for a fiber of the elliptic modular family: generators `τ` and `1`
/// of `Zτ + Z` with vectors `1` and `0`.
pub fn elliptic_family_fiber_h0(tau: &Complex) -> Result<usize> {
    if !tau.im.is_positive() {
        return Err(Error::NotInUpperHalfPlane(fmt_c(tau)));
    }
    let prec = tau.precision();
    let rep = FlatRep {
        generator_vectors: vec![vec![Complex::one(prec)], vec![Complex::zero(prec)]],
        lattice_periods: vec![vec![tau.clone()], vec![Complex::one(prec)]],
    };
    Ok(solve_sections(&rep)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CandidateDimension {
    Curve,
    Surface,
}

/// A compact submanifold `N ⊂ M` described by its numerical data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub dimension: CandidateDimension,
    pub genus: i64,
    pub in_fiber: bool,
    pub degree_over_c: i64,
    pub ramification_degree: i64,
    pub g_c: i64,
}

impl Candidate {
    pub fn curve(genus: i64, in_fiber: bool, degree_over_c: i64, ramification_degree: i64, g_c: i64) -> Self {
        Candidate {
            dimension: CandidateDimension::Curve,
            genus,
            in_fiber,
            degree_over_c,
            ramification_degree,
            g_c,
        }
    }

    pub fn surface(in_fiber: bool, g_c: i64) -> Self {
        Candidate {
            dimension: CandidateDimension::Surface,
            genus: 0,
            in_fiber,
            degree_over_c: 0,
            ramification_degree: 0,
            g_c,
        }
    }
}

fn classified(subject: SubjectKind, verdict: Verdict, reason: &str, citations: &[&str]) -> SplittingReport {
    SplittingReport {
        subject,
        h0: None,
        verdict,
        certificate: Certificate::Classification {
            reason: reason.to_string(),
        },
        dphi_value: None,
        citations: citations.iter().map(|s| s.to_string()).collect(),
    }
}

/// Decides which candidates can split, by the case analysis on fibers,
/// curves in fibers and multisections.
pub fn classify_candidate(c: &Candidate) -> Result<SplittingReport> {
    if c.g_c < 2 {
        return Err(Error::InconsistentData(format!("base genus {} < 2", c.g_c)));
    }
    if c.genus < 0 || c.degree_over_c < 0 || c.ramification_degree < 0 {
        return Err(Error::InconsistentData("negative genus or degree".into()));
    }
    use SubjectKind::*;
    use Verdict::*;
    match c.dimension {
        CandidateDimension::Surface if c.in_fiber => Ok(classified(Fiber, NonSplit, "a fiber never splits", &[FIBER_CITATION])),
        CandidateDimension::Surface => Ok(classified(Other, NonSplit, "a non-fiber surface cannot split", &[SURFACE_CITATION])),
        CandidateDimension::Curve if c.genus == 0 => Ok(classified(Other, NonSplit, "M contains no rational curve", &[])),
        CandidateDimension::Curve if c.in_fiber => {
            if c.degree_over_c != 0 {
                return Err(Error::InconsistentData(format!(
                    "a curve in a fiber has degree 0 over C, got {}",
                    c.degree_over_c
                )));
            }
            if c.genus == 1 {
                Ok(classified(EllipticInFiber, Split, "elliptic curve in a fiber", &[CURVE_CITATION]))
            } else {
                Ok(classified(
                    Other,
                    NonSplit,
                    "K_N is trivial for a splitting curve in a fiber, forcing genus 1",
                    &[],
                ))
            }
        }
        CandidateDimension::Curve => {
            if c.degree_over_c == 0 {
                return Err(Error::InconsistentData("a multisection has positive degree over C".into()));
            }
            let lhs = 2 * c.genus - 2;
            let rhs = c.degree_over_c * (2 * c.g_c - 2) + c.ramification_degree;
            if lhs != rhs {
                return Err(Error::InconsistentData(format!(
                    "Riemann–Hurwitz: 2g−2 = {lhs} but d(2g_C−2) + R = {rhs}"
                )));
            }
            if c.ramification_degree == 0 {
                Ok(classified(
                    EtaleMultisection,
                    Split,
                    "unramified multisection: the differential of the projection splits",
                    &[],
                ))
            } else {
                Ok(classified(Other, NonSplit, "a splitting multisection has R = 0", &[]))
            }
        }
    }
}
