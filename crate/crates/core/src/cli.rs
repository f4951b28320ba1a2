//! Command-line front end: configuration files, command dispatch and JSON
//! reports.
//!
//! Config files are plain `key = value` lines; `#` starts a comment.
//!
//! ```text
//! algebra.a = 3
//! algebra.b = -1
//! order = saturate-from-standard      # or: standard, basis
//! order.basis = 1 0 0 0; 0 1 0 0; 0 0 1 0; 1/2 1/2 1/2 1/2
//! polarization.rho = 0 0 1 0
//! precision = 128
//! tolerance = 1e-12
//! seed = 0
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cm_points::{enumerate_cm_points, CMPoint, Window};
use crate::error::{Error, ParseError};
use crate::family::{
    canonical_degree_check, cocycle_check, e_invariant_under, fmt_c, fmt_r, isogeny_lattice_check, riemann_conditions_check,
    FamilyGroupElement, PeriodLattice, PolarizationData, UpperHalfPoint,
};
use crate::linalg::{Complex, MatrixQ, Rational, Real, DEFAULT_PRECISION};
use crate::orders::OrderLattice;
use crate::quaternion::{candidate_places, hilbert_symbol, AlgebraParams, NumericAlgebra, QuatElement};
use crate::splitting::{classify_candidate, curve_h0, fiber_h0, Candidate, CURVE_CITATION, FIBER_CITATION};

pub const SCHEMA_VERSION: u32 = 1;
/// Overrides the default working precision (bits).
pub const PRECISION_ENV: &str = "FAKELL_PRECISION";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderSpec {
    SaturateFromStandard,
    Standard,
    Basis(Vec<Vec<Rational>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub a: Rational,
    pub b: Rational,
    pub order: OrderSpec,
    pub rho: Option<[Rational; 4]>,
    pub precision: usize,
    pub tolerance: Rational,
    pub seed: u64,
}

impl Default for Config {
    /// The `(3, −1)` algebra with its saturated maximal order.
    fn default() -> Self {
        Config {
            a: Rational::from_int(3),
            b: Rational::from_int(-1),
            order: OrderSpec::SaturateFromStandard,
            rho: None,
            precision: DEFAULT_PRECISION,
            tolerance: Rational::one().recip_pow10(12),
            seed: 0,
        }
    }
}

fn parse_rational(s: &str, what: &str) -> Result<Rational, ParseError> {
    Rational::from_str(s.trim()).map_err(|_| ParseError::new(format!("{what}: cannot parse '{s}' as an exact rational")))
}

fn parse_row(s: &str, what: &str) -> Result<Vec<Rational>, ParseError> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| parse_rational(t, what))
        .collect()
}

fn parse_quat(s: &str, what: &str) -> Result<[Rational; 4], ParseError> {
    let row = parse_row(s, what)?;
    <[Rational; 4]>::try_from(row).map_err(|r| ParseError::new(format!("{what}: expected 4 coordinates, got {}", r.len())))
}

impl Config {
    /// Defaults with the precision taken from the environment when set.
    pub fn from_env() -> Result<Self, ParseError> {
        let mut c = Config::default();
        if let Ok(v) = std::env::var(PRECISION_ENV) {
            c.precision = parse_precision(&v).map_err(|e| ParseError::new(format!("{PRECISION_ENV}: {}", e.message)))?;
        }
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Config::parse_over(text, Config::default())
    }

    /// Parses `text`, starting from `base` for absent keys, and certifies
    /// the algebra and order.
    pub fn parse_over(text: &str, base: Config) -> Result<Self, ParseError> {
        let mut cfg = base;
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut order_kind: Option<String> = None;
        let mut basis: Option<Vec<Vec<Rational>>> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ParseError::new(format!("expected 'key = value', got '{content}'")).at_line(line))?;
            let key = key.trim().to_string();
            let value = value.trim();
            if seen.insert(key.clone(), line).is_some() {
                return Err(ParseError::new(format!("duplicate key '{key}'")).at_line(line));
            }
            let at = |e: ParseError| e.at_line(line);
            match key.as_str() {
                "algebra.a" => cfg.a = parse_rational(value, &key).map_err(at)?,
                "algebra.b" => cfg.b = parse_rational(value, &key).map_err(at)?,
                "order" => order_kind = Some(value.to_string()),
                "order.basis" => {
                    let rows = value
                        .split(';')
                        .map(|r| parse_row(r, &key))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(at)?;
                    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                        return Err(ParseError::new("order.basis: expected 4 rows of 4 rationals separated by ';'").at_line(line));
                    }
                    basis = Some(rows);
                }
                "polarization.rho" => cfg.rho = Some(parse_quat(value, &key).map_err(at)?),
                "precision" => cfg.precision = parse_precision(value).map_err(at)?,
                "tolerance" => {
                    let t = parse_rational(value, &key).map_err(at)?;
                    if !t.is_positive() {
                        return Err(ParseError::new("tolerance must be positive").at_line(line));
                    }
                    cfg.tolerance = t;
                }
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| ParseError::new(format!("seed: '{value}' is not a non-negative integer")).at_line(line))?
                }
                _ => return Err(ParseError::new(format!("unknown key '{key}'")).at_line(line)),
            }
        }
        let line_of = |k: &str| seen.get(k).copied();
        let locate = |e: ParseError, k: &str| match line_of(k) {
            Some(l) => e.at_line(l),
            None => e,
        };
        cfg.order = match (order_kind.as_deref(), basis) {
            (None | Some("basis"), Some(rows)) => OrderSpec::Basis(rows),
            (Some("basis"), None) => return Err(locate(ParseError::new("order = basis requires order.basis"), "order")),
            (Some(_), Some(_)) => return Err(locate(ParseError::new("order.basis given but order is not 'basis'"), "order.basis")),
            (Some("saturate-from-standard"), None) => OrderSpec::SaturateFromStandard,
            (Some("standard"), None) => OrderSpec::Standard,
            (Some(other), None) => {
                return Err(locate(
                    ParseError::new(format!("order: expected saturate-from-standard, standard or basis, got '{other}'")),
                    "order",
                ))
            }
            (None, None) => cfg.order,
        };
        let params = AlgebraParams::new(cfg.a.clone(), cfg.b.clone()).map_err(|e| {
            locate(
                ParseError::new(e.to_string()),
                if line_of("algebra.b").is_some() { "algebra.b" } else { "algebra.a" },
            )
        })?;
        if let OrderSpec::Basis(rows) = &cfg.order {
            let m = MatrixQ::from_rows(rows.clone()).map_err(|e| ParseError::new(e.to_string()))?;
            let lat = OrderLattice::new(params.clone(), m).map_err(|e| locate(ParseError::new(e.to_string()), "order.basis"))?;
            let cert = lat.is_order();
            if !cert.is_order() {
                return Err(locate(
                    ParseError::new(format!("not an order: {}", cert.violations.join("; "))),
                    "order.basis",
                ));
            }
        }
        if let Some(r) = &cfg.rho {
            let probe = OrderLattice::standard(params);
            PolarizationData::with_scale(&probe, QuatElement::from_coords(r.clone()), Rational::one())
                .map_err(|e| locate(ParseError::new(e.to_string()), "polarization.rho"))?;
        }
        Ok(cfg)
    }

    /// Canonical text form; `parse(to_text())` gives back `self`.
    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("algebra.a".into(), self.a.to_string());
        m.insert("algebra.b".into(), self.b.to_string());
        match &self.order {
            OrderSpec::SaturateFromStandard => {
                m.insert("order".into(), "saturate-from-standard".into());
            }
            OrderSpec::Standard => {
                m.insert("order".into(), "standard".into());
            }
            OrderSpec::Basis(rows) => {
                m.insert("order".into(), "basis".into());
                let s = rows
                    .iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                    .collect::<Vec<_>>()
                    .join("; ");
                m.insert("order.basis".into(), s);
            }
        }
        if let Some(r) = &self.rho {
            m.insert(
                "polarization.rho".into(),
                r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
            );
        }
        m.insert("precision".into(), self.precision.to_string());
        m.insert("tolerance".into(), self.tolerance.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self, ParseError> {
        let text: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        Config::parse(&text)
    }

    pub fn resolve(&self) -> Result<Context, CliError> {
        let params = AlgebraParams::new(self.a.clone(), self.b.clone())?;
        let order = match &self.order {
            OrderSpec::Standard => OrderLattice::standard(params.clone()),
            OrderSpec::SaturateFromStandard => OrderLattice::standard(params.clone()).saturate()?,
            OrderSpec::Basis(rows) => OrderLattice::new(params.clone(), MatrixQ::from_rows(rows.clone())?)?,
        };
        let rho = self.rho.clone().map_or_else(QuatElement::y, QuatElement::from_coords);
        let polarization = PolarizationData::new(&order, rho)?;
        Ok(Context {
            config: self.clone(),
            num: params.numeric(self.precision),
            params,
            order,
            polarization,
            tolerance: Real::from_rational(&self.tolerance, self.precision),
        })
    }
}

fn parse_precision(s: &str) -> Result<usize, ParseError> {
    match s.trim().parse::<usize>() {
        Ok(p) if (64..=4096).contains(&p) => Ok(p),
        _ => Err(ParseError::new(format!(
            "precision: expected an integer number of bits in 64..=4096, got '{s}'"
        ))),
    }
}

/// Certified algebra, order and numeric context for a run.
#[derive(Clone, Debug)]
pub struct Context {
    pub config: Config,
    pub params: AlgebraParams,
    pub order: OrderLattice,
    pub num: NumericAlgebra,
    pub polarization: PolarizationData,
    pub tolerance: Real,
}

impl Context {
    pub fn precision(&self) -> usize {
        self.config.precision
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ParseError),
    #[error("computation error: {0}")]
    Computation(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Computation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 4,
        }
    }
}

/// Exit code of a run whose property suite found a failure.
pub const EXIT_SUITE_FAILED: i32 = 3;

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(
    name = "fakell",
    version,
    about = "Quaternion orders, CM points and splitting in modular families of fake elliptic curves"
)]
pub struct Cli {
    /// Config file (key = value lines); defaults to the (3,-1) example.
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Working precision in bits (overrides config and environment).
    #[arg(long, global = true)]
    pub precision: Option<usize>,
    /// Seed for randomized suites (overrides config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Inspect the quaternion algebra.
    Algebra {
        #[command(subcommand)]
        action: AlgebraAction,
    },
    /// Certify, measure or saturate the configured order.
    Order {
        #[command(subcommand)]
        action: OrderAction,
    },
    /// Units of reduced norm 1 with coordinates in [-height, height].
    Units {
        #[arg(long)]
        height: i64,
        /// Keep only units congruent to 1 modulo this level.
        #[arg(long)]
        congruence: Option<i64>,
    },
    /// CM points.
    Cm {
        #[command(subcommand)]
        action: CmAction,
    },
    /// Fiber computations.
    Fiber {
        #[command(subcommand)]
        action: FiberAction,
    },
    /// Elliptic curves in CM fibers.
    Curve {
        #[command(subcommand)]
        action: CurveAction,
    },
    /// Decide whether a candidate submanifold can split.
    Classify {
        #[arg(long, default_value_t = 0)]
        genus: i64,
        #[arg(long, default_value_t = 0)]
        degree: i64,
        #[arg(long, default_value_t = 0)]
        ramification: i64,
        #[arg(long)]
        gc: i64,
        #[arg(long)]
        in_fiber: bool,
        #[arg(long)]
        surface: bool,
    },
    /// Randomized property suites (seeded).
    Suite {
        #[arg(value_enum)]
        kind: SuiteKind,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum AlgebraAction {
    Check,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum OrderAction {
    Verify,
    Disc,
    Maximal,
    Saturate,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum CmAction {
    Enumerate {
        #[arg(long)]
        height: i64,
        /// re_min,re_max,im_min,im_max (exact decimals or fractions).
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum FiberAction {
    H0 {
        /// e.g. i, 2i, 0.5+1.5i, -1/2+i, or re,im
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum CurveAction {
    Split {
        /// Coordinates k,l,m,n of μ = k + l·x + m·y + n·xy.
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Riemann,
    Cocycle,
    Isogeny,
    All,
}

/// Parses `i`, `2i`, `-i`, `3`, `a+bi`, `a-bi` or `re,im` with exact
/// decimal or fractional parts.
pub fn parse_complex(s: &str) -> Result<(Rational, Rational), ParseError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || ParseError::new(format!("cannot parse '{s}' as a complex number"));
    if let Some((re, im)) = s.split_once(',') {
        return Ok((
            parse_rational(re, "re").map_err(|_| err())?,
            parse_rational(im, "im").map_err(|_| err())?,
        ));
    }
    let imag = |t: &str| -> Result<Rational, ParseError> {
        match t {
            "" | "+" => Ok(Rational::one()),
            "-" => Ok(Rational::from_int(-1)),
            _ => parse_rational(t.trim_end_matches('*'), "im").map_err(|_| err()),
        }
    };
    let Some(body) = s.strip_suffix('i') else {
        return Ok((parse_rational(&s, "re").map_err(|_| err())?, Rational::zero()));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok((parse_rational(&body[..k], "re").map_err(|_| err())?, imag(&body[k..])?)),
        None => Ok((Rational::zero(), imag(body)?)),
    }
}

pub fn parse_window(s: &str) -> Result<Window, ParseError> {
    let row = parse_row(s, "window")?;
    let [a, b, c, d] = <[Rational; 4]>::try_from(row).map_err(|_| ParseError::new("window: expected re_min,re_max,im_min,im_max"))?;
    Ok(Window::new(a, b, c, d))
}

#[derive(Clone, Debug, Serialize)]
pub struct Inputs {
    pub config: BTreeMap<String, String>,
    pub argv: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub inputs: Inputs,
    pub status: String,
    pub results: Value,
    pub citations: Vec<String>,
    pub timings: Timings,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Algebra { .. } => "algebra check".into(),
        Command::Order { action } => format!("order {}", format!("{action:?}").to_lowercase()),
        Command::Units { .. } => "units".into(),
        Command::Cm { .. } => "cm enumerate".into(),
        Command::Fiber { .. } => "fiber h0".into(),
        Command::Curve { .. } => "curve split".into(),
        Command::Classify { .. } => "classify".into(),
        Command::Suite { kind, .. } => format!("suite {}", format!("{kind:?}").to_lowercase()),
    }
}

struct Outcome {
    results: Value,
    citations: Vec<String>,
    ok: bool,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Outcome {
            results,
            citations: Vec::new(),
            ok: true,
        }
    }

    fn cite(mut self, c: &str) -> Self {
        self.citations.push(c.to_string());
        self
    }
}

fn basis_strings(order: &OrderLattice) -> Vec<String> {
    order.generators().iter().map(|g| g.to_string()).collect()
}

/// Runs `cmd` against `ctx`. `argv` is echoed into the report.
pub fn run(cmd: &Command, ctx: &Context, argv: Vec<String>) -> Result<Report, CliError> {
    let start = std::time::Instant::now();
    let out = dispatch(cmd, ctx)?;
    Ok(Report {
        schema: SCHEMA_VERSION,
        command: command_name(cmd),
        inputs: Inputs {
            config: ctx.config.to_pairs(),
            argv,
        },
        status: if out.ok { "ok" } else { "failed" }.into(),
        results: out.results,
        citations: out.citations,
        timings: Timings {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

fn dispatch(cmd: &Command, ctx: &Context) -> Result<Outcome, CliError> {
    let prec = ctx.precision();
    Ok(match cmd {
        Command::Algebra { .. } => {
            let p = &ctx.params;
            Outcome::ok(json!({
                "a": p.a().to_string(),
                "b": p.b().to_string(),
                "ramified": p.ramified_primes().into_iter().collect::<Vec<_>>(),
                "division": !p.ramified_primes().is_empty(),
                "indefinite": true,
                "indefinite_division": p.is_indefinite_division(),
                "discriminant": p.discriminant().to_string(),
            }))
            .cite("B = (a, b / Q) with a > 0 is split at infinity; it is a division algebra iff some finite prime ramifies")
        }
        Command::Order { action } => order_command(action, ctx)?,
        Command::Units { height, congruence } => {
            let units = match congruence {
                Some(n) if *n >= 1 => ctx.order.congruence_units(*height, *n),
                Some(n) => return Err(ParseError::new(format!("--congruence must be positive, got {n}")).into()),
                None => ctx.order.enumerate_units(*height),
            };
            Outcome::ok(json!({
                "height": height,
                "congruence": congruence,
                "count": units.len(),
                "units": units.iter().map(|u| json!({
                    "element": u.element.to_string(),
                    "coords": u.coords,
                    "is_elliptic": u.is_elliptic,
                })).collect::<Vec<_>>(),
            }))
        }
        Command::Cm {
            action: CmAction::Enumerate { height, window },
        } => {
            let w = match window {
                Some(s) => parse_window(s)?,
                None => Window::default_window(),
            };
            let pts = enumerate_cm_points(&ctx.order, &ctx.num, *height, &w)?;
            Outcome::ok(json!({
                "height": height,
                "window": w.to_strings(),
                "count": pts.len(),
                "points": pts.iter().map(CMPoint::summary).collect::<Vec<_>>(),
            }))
            .cite("A_τ is isogenous to a product of elliptic curves iff τ is fixed by a projectively non-trivial element of B^×")
        }
        Command::Fiber {
            action: FiberAction::H0 { tau },
        } => {
            let (re, im) = parse_complex(tau)?;
            let t = UpperHalfPoint::from_rationals(&re, &im, prec)?;
            let r = fiber_h0(&ctx.order, &ctx.num, &t)?;
            let rep = r.report();
            Outcome::ok(json!({
                "tau": fmt_c(t.tau()),
                "h0": r.h0,
                "verdict": rep.verdict,
                "det_witness": fmt_r(&r.det_abs),
                "det_nonzero": r.det_nonzero(),
                "det_factored": r.det_factored.to_string(),
                "report": rep,
            }))
            .cite(FIBER_CITATION)
        }
        Command::Curve {
            action: CurveAction::Split { mu },
        } => {
            let coords = parse_quat(mu, "mu")?;
            let mu = QuatElement::from_coords(coords);
            if !ctx.order.contains(&mu) {
                return Err(Error::NotInOrder(format!("μ = {mu}")).into());
            }
            let cm = CMPoint::new(&ctx.num, mu)?;
            let r = curve_h0(&cm)?;
            let rep = r.report();
            Outcome::ok(json!({
                "mu": cm.mu.to_string(),
                "tau": fmt_c(cm.tau.tau()),
                "tau_prime": fmt_c(&cm.tau_prime),
                "h0": r.h0,
                "dphi": fmt_c(&r.dphi),
                "verdict": rep.verdict,
                "eigenvector": [fmt_c(&r.eigenvector[0]), fmt_c(&r.eigenvector[1])],
                "eigen_residual": fmt_r(&r.eigen_residual),
                "report": rep,
            }))
            .cite(CURVE_CITATION)
        }
        Command::Classify {
            genus,
            degree,
            ramification,
            gc,
            in_fiber,
            surface,
        } => {
            let cand = if *surface {
                Candidate::surface(*in_fiber, *gc)
            } else {
                Candidate::curve(*genus, *in_fiber, *degree, *ramification, *gc)
            };
            let rep = classify_candidate(&cand)?;
            let citations = rep.citations.clone();
            Outcome {
                results: json!({ "candidate": cand, "verdict": rep.verdict, "subject": rep.subject, "report": rep }),
                citations,
                ok: true,
            }
        }
        Command::Suite { kind, count } => run_suite(*kind, *count, ctx)?,
    })
}

fn order_command(action: &OrderAction, ctx: &Context) -> Result<Outcome, CliError> {
    let o = &ctx.order;
    Ok(match action {
        OrderAction::Verify => {
            let cert = o.is_order();
            Outcome {
                ok: true,
                results: json!({ "basis": basis_strings(o), "is_order": cert.is_order(), "certificate": cert }),
                citations: Vec::new(),
            }
        }
        OrderAction::Disc => Outcome::ok(json!({
            "basis": basis_strings(o),
            "reduced_discriminant": o.reduced_discriminant()?.to_string(),
            "algebra_discriminant": ctx.params.discriminant().to_string(),
        })),
        OrderAction::Maximal => Outcome::ok(json!({
            "basis": basis_strings(o),
            "maximal": o.is_maximal()?,
            "reduced_discriminant": o.reduced_discriminant()?.to_string(),
        }))
        .cite("an order is maximal iff its reduced discriminant is the product of the ramified primes"),
        OrderAction::Saturate => {
            let m = o.saturate()?;
            Outcome::ok(json!({
                "basis": basis_strings(&m),
                "reduced_discriminant": m.reduced_discriminant()?.to_string(),
                "is_order": m.is_order().is_order(),
            }))
        }
    })
}

fn random_tau(rng: &mut ChaCha8Rng, prec: usize) -> UpperHalfPoint {
    UpperHalfPoint::from_f64(rng.gen_range(-1.0..1.0), rng.gen_range(0.2..2.0), prec).expect("Im > 0")
}

fn random_z(rng: &mut ChaCha8Rng, prec: usize) -> [Complex; 2] {
    std::array::from_fn(|_| {
        Complex::new(
            Real::from_f64(rng.gen_range(-1.0..1.0), prec),
            Real::from_f64(rng.gen_range(-1.0..1.0), prec),
        )
    })
}

#[derive(Default)]
struct SuiteTally {
    cases: usize,
    failures: Vec<String>,
}

impl SuiteTally {
    fn record(&mut self, passed: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !passed && self.failures.len() < 20 {
            self.failures.push(what());
        } else if !passed {
            self.failures.push(String::new());
        }
    }

    fn to_json(&self, name: &str) -> Value {
        json!({
            "suite": name,
            "cases": self.cases,
            "failed": self.failures.len(),
            "passed": self.failures.is_empty(),
            "failures": self.failures.iter().filter(|f| !f.is_empty()).collect::<Vec<_>>(),
        })
    }
}

fn suite_riemann(ctx: &Context, count: usize, rng: &mut ChaCha8Rng) -> Result<SuiteTally, CliError> {
    let mut t = SuiteTally::default();
    for _ in 0..count {
        let tau = random_tau(rng, ctx.precision());
        let lat = PeriodLattice::new(&ctx.order, &ctx.num, &tau)?;
        let rep = riemann_conditions_check(&lat, &ctx.order, &ctx.num, &ctx.polarization)?;
        t.record(rep.all_passed(), || format!("τ = {}: {:?}", rep.tau, rep));
    }
    Ok(t)
}

fn suite_cocycle(ctx: &Context, count: usize, rng: &mut ChaCha8Rng) -> Result<SuiteTally, CliError> {
    let mut t = SuiteTally::default();
    let units = ctx.order.enumerate_units(2);
    let prec = ctx.precision();
    let pick = |rng: &mut ChaCha8Rng| -> Result<FamilyGroupElement, CliError> {
        let c: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-3..=3));
        let u = &units[rng.gen_range(0..units.len())];
        Ok(FamilyGroupElement::from_unit(&ctx.order, ctx.order.element(&c), u)?)
    };
    for _ in 0..count {
        let g1 = pick(rng)?;
        let g2 = pick(rng)?;
        let tau = random_tau(rng, prec);
        let z = random_z(rng, prec);
        let c = cocycle_check(&ctx.num, &g1, &g2, &z, &tau, &ctx.tolerance)?;
        t.record(c.passed, || {
            format!("cocycle residual {} for {:?}, {:?}", fmt_r(&c.residual), g1, g2)
        });
        let d = canonical_degree_check(&ctx.num, &g1, &z, &tau, &ctx.tolerance)?;
        t.record(d.passed, || format!("determinant residual {} for {:?}", fmt_r(&d.residual), g1));
    }
    Ok(t)
}

fn suite_isogeny(ctx: &Context, count: usize, rng: &mut ChaCha8Rng) -> Result<SuiteTally, CliError> {
    let mut t = SuiteTally::default();
    let units = ctx.order.enumerate_units(2);
    let step = (units.len() / 10).max(1);
    let chosen: Vec<_> = units.iter().step_by(step).take(10).collect();
    for _ in 0..count {
        let tau = random_tau(rng, ctx.precision());
        for u in &chosen {
            let c = isogeny_lattice_check(&ctx.order, &ctx.num, &u.element, &tau)?;
            t.record(c.passed, || format!("γ = {}: residual {}", u.element, fmt_r(&c.residual)));
        }
    }
    let rho = &ctx.polarization.rho;
    for _ in 0..(5 * count) {
        let m1 = ctx.order.element(&std::array::from_fn(|_| rng.gen_range(-5..=5)));
        let m2 = ctx.order.element(&std::array::from_fn(|_| rng.gen_range(-5..=5)));
        let g = &units[rng.gen_range(0..units.len())].element;
        t.record(e_invariant_under(&ctx.params, rho, &m1, &m2, g), || {
            format!("E not invariant: {m1}, {m2}, γ = {g}")
        });
    }
    Ok(t)
}

fn suite_arithmetic(count: usize, rng: &mut ChaCha8Rng) -> SuiteTally {
    let mut t = SuiteTally::default();
    for _ in 0..count {
        let a = Rational::from_int(rng.gen_range(1..200) * if rng.gen_bool(0.5) { 1 } else { -1 });
        let b = Rational::from_int(rng.gen_range(1..200) * if rng.gen_bool(0.5) { 1 } else { -1 });
        let prod: i32 = candidate_places(&a, &b)
            .into_iter()
            .map(|p| hilbert_symbol(&a, &b, p) as i32)
            .product();
        t.record(prod == 1, || format!("reciprocity fails for ({a}, {b})"));
    }
    t
}

fn run_suite(kind: SuiteKind, count: usize, ctx: &Context) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    let mut parts = Vec::new();
    if matches!(kind, SuiteKind::Riemann | SuiteKind::All) {
        parts.push(("riemann", suite_riemann(ctx, count, &mut rng)?));
    }
    if matches!(kind, SuiteKind::Cocycle | SuiteKind::All) {
        parts.push(("cocycle", suite_cocycle(ctx, count, &mut rng)?));
    }
    if matches!(kind, SuiteKind::Isogeny | SuiteKind::All) {
        parts.push(("isogeny", suite_isogeny(ctx, count, &mut rng)?));
    }
    if kind == SuiteKind::All {
        parts.push(("arithmetic", suite_arithmetic(5 * count, &mut rng)));
    }
    let ok = parts.iter().all(|(_, t)| t.failures.is_empty());
    Ok(Outcome {
        results: json!({
            "seed": ctx.config.seed,
            "count": count,
            "passed": ok,
            "suites": parts.iter().map(|(n, t)| t.to_json(n)).collect::<Vec<_>>(),
        }),
        citations: vec![
            "the Riemann form satisfies the Riemann conditions for every τ".into(),
            "the factor of automorphy of T_M is a cocycle with determinant (cτ+d)^-4, i.e. K_M = 2π*K_C".into(),
            "multiplication by 1/(cτ+d) identifies A_τ with A_γτ and preserves E".into(),
        ],
        ok,
    })
}

/// Full CLI entry point: parses `args`, runs, writes the report, returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    // the config file is echoed as key/value pairs, not by path
    let config_arg = cli.config.as_ref().map(|p| p.as_os_str().to_os_string());
    let mut skipped = false;
    let argv = args
        .iter()
        .skip(1)
        .filter(|a| {
            let drop = !skipped && config_arg.as_ref() == Some(*a);
            skipped |= drop;
            !drop
        })
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, argv) {
        Ok(report) => {
            if report.ok() {
                0
            } else {
                EXIT_SUITE_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Loads the config, runs the command and writes the report.
pub fn execute(cli: &Cli, argv: Vec<String>) -> Result<Report, CliError> {
    let base = Config::from_env()?;
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Config::parse_over(&text, base)?
        }
        None => base,
    };
    if let Some(p) = cli.precision {
        config.precision = parse_precision(&p.to_string())?;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    let ctx = config.resolve()?;
    let report = run(&cli.command, &ctx, argv)?;
    let text = report.to_json();
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            // a closed pipe (e.g. `| head`) is not an error
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    Ok(report)
}
