//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string; failures come back as `{"error": "..."}`.

use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use fakell::cm_points::{enumerate_cm_points, CMPoint, Window};
use fakell::family::{moebius_act, UpperHalfPoint};
use fakell::linalg::{Complex, Rational};
use fakell::orders::{default_order, OrderLattice};
use fakell::quaternion::{NumericAlgebra, QuatElement};
use fakell::splitting::{curve_h0, fiber_h0};

const PREC: usize = 128;
/// Keeps interactive requests responsive.
const MAX_HEIGHT: u32 = 4;

fn context() -> (OrderLattice, NumericAlgebra) {
    let order = default_order();
    let num = order.params().numeric(PREC);
    (order, num)
}

fn xy(z: &Complex) -> [f64; 2] {
    [z.re.to_f64(), z.im.to_f64()]
}

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn check_height(height: u32) -> Result<i64, String> {
    if (1..=MAX_HEIGHT).contains(&height) {
        Ok(i64::from(height))
    } else {
        Err(format!("height must be between 1 and {MAX_HEIGHT}"))
    }
}

#[derive(Serialize)]
struct PlotPoint {
    x: f64,
    y: f64,
    tau: String,
    mu: String,
    mu_coords: [String; 4],
    tau_prime: String,
}

fn plot_point(p: &CMPoint) -> PlotPoint {
    let [x, y] = xy(p.tau.tau());
    let s = p.summary();
    PlotPoint {
        x,
        y,
        tau: s.tau,
        mu: s.mu,
        mu_coords: s.mu_coords,
        tau_prime: s.tau_prime,
    }
}

/// CM points of the (3,−1) maximal order up to `height` in a window.
#[wasm_bindgen]
pub fn cm_points(height: u32, re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> String {
    respond((|| {
        let height = check_height(height)?;
        if !(re_min < re_max && im_min < im_max && im_max > 0.0) {
            return Err("empty window".to_string());
        }
        let (order, num) = context();
        let w = Window::from_f64(re_min, re_max, im_min.max(0.0), im_max);
        let pts = enumerate_cm_points(&order, &num, height, &w).map_err(|e| e.to_string())?;
        Ok(json!({ "count": pts.len(), "points": pts.iter().map(plot_point).collect::<Vec<_>>() }))
    })())
}

/// Images `γτ` of a point under the norm-one units of height ≤ `height`.
#[wasm_bindgen]
pub fn unit_orbit(re: f64, im: f64, height: u32) -> String {
    respond((|| {
        let height = check_height(height)?;
        let (order, num) = context();
        let tau = UpperHalfPoint::from_f64(re, im, PREC).map_err(|e| e.to_string())?;
        let mut images = Vec::new();
        for u in order.enumerate_units(height) {
            let t = moebius_act(&num, &u.element, &tau).map_err(|e| e.to_string())?;
            let [x, y] = xy(t.tau());
            images.push(json!({ "x": x, "y": y, "gamma": u.element.to_string(), "elliptic": u.is_elliptic }));
        }
        Ok(json!({ "tau": [re, im], "count": images.len(), "images": images }))
    })())
}

/// Splitting report for the fiber over `τ`.
#[wasm_bindgen]
pub fn fiber_report(re: f64, im: f64) -> String {
    respond((|| {
        let (order, num) = context();
        let tau = UpperHalfPoint::from_f64(re, im, PREC).map_err(|e| e.to_string())?;
        let r = fiber_h0(&order, &num, &tau).map_err(|e| e.to_string())?;
        serde_json::to_value(r.report()).map_err(|e| e.to_string())
    })())
}

/// Splitting report for the elliptic curve in the CM fiber fixed by
/// `μ = k + l·x + m·y + n·xy` (exact rationals such as `1/2`).
#[wasm_bindgen]
pub fn curve_report(k: &str, l: &str, m: &str, n: &str) -> String {
    respond((|| {
        let parse = |s: &str| s.trim().parse::<Rational>().map_err(|_| format!("'{s}' is not a rational number"));
        let mu = QuatElement::new(parse(k)?, parse(l)?, parse(m)?, parse(n)?);
        let (order, num) = context();
        if !order.contains(&mu) {
            return Err(format!("μ = {mu} is not in the order"));
        }
        let cm = CMPoint::new(&num, mu).map_err(|e| e.to_string())?;
        let r = curve_h0(&cm).map_err(|e| e.to_string())?;
        let [x, y] = xy(cm.tau.tau());
        Ok(json!({ "tau": [x, y], "summary": cm.summary(), "report": r.report() }))
    })())
}
