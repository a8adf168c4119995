//! Browser bindings. Every export takes plain strings and numbers and
//! returns a JSON document, so the page needs no generated types.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use luroth_dim::serde_ext::real_to_json;
use luroth_dim::solvers::{dim_e, dim_einf, dim_esup, h_alpha, solve_gb, solve_sm, DEFAULT_SOLVER_TOL};
use luroth_dim::{cylinder, digits, growth_profile, parse_rational, periodicity, DigitSeq, Psi};

const MAX_DIGITS: usize = 40;
const MAX_HORIZON: u64 = 100_000;

fn float(x: &luroth_dim::Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Digits of `x`, the nested cylinders they pick out and the period.
pub fn expansion(x: &str, n: usize) -> Result<Value, String> {
    let x = parse_rational(x).map_err(|e| e.to_string())?;
    let n = n.clamp(1, MAX_DIGITS);
    let ds = digits(&x, n).map_err(|e| e.to_string())?;
    let mut levels = Vec::with_capacity(n);
    for k in 1..=n {
        let c = cylinder(&ds.prefix(k)).map_err(|e| e.to_string())?;
        levels.push(json!({
            "digit": luroth_dim::serde_ext::big_to_json(&ds.digits()[k - 1]),
            "left": c.left.to_string(),
            "right": c.right.to_string(),
            "left_f64": float(&c.left),
            "right_f64": float(&c.right),
            "ln_length": -luroth_dim::numeric::ln_biguint(&c.q),
        }));
    }
    let period = periodicity(&x).map_err(|e| e.to_string())?;
    Ok(json!({
        "x": x.to_string(),
        "x_f64": float(&x),
        "levels": levels,
        "preperiod": period.preperiod,
        "period": period.period,
    }))
}

/// `S(M)` for `M = 2..=max_m`, and `H(α)` on `α_k = k·alpha_max/steps`.
pub fn curves(max_m: u64, alpha_max: f64, steps: u32) -> Result<Value, String> {
    if !(2..=4096).contains(&max_m) {
        return Err(format!("M must be in 2..=4096, got {max_m}"));
    }
    if !(alpha_max > 0.0 && alpha_max <= 700.0) || steps == 0 || steps > 500 {
        return Err("need 0 < alpha_max <= 700 and 1 <= steps <= 500".into());
    }
    let tol = DEFAULT_SOLVER_TOL;
    let s: Vec<Value> = (2..=max_m)
        .map(|m| solve_sm(m, tol).map(|r| json!([m, r.value])))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let h: Vec<Value> = (1..=steps)
        .map(|k| {
            let a = alpha_max * f64::from(k) / f64::from(steps);
            h_alpha(a, tol).map(|r| json!([a, r.value]))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    Ok(json!({"S": s, "H": h}))
}

/// `G(B)` for a single `B > 1`.
pub fn g_of(b: f64) -> Result<Value, String> {
    let r = solve_gb(b, DEFAULT_SOLVER_TOL).map_err(|e| e.to_string())?;
    serde_json::to_value(r).map_err(|e| e.to_string())
}

/// Growth profile of ψ and the three dimensions; a missing formula is
/// reported as a reason instead of a value.
pub fn psi_dimensions(expr: &str, horizon: u64) -> Result<Value, String> {
    let psi = Psi::parse(expr).map_err(|e| e.to_string())?;
    let p = growth_profile(&psi, horizon.clamp(16, MAX_HORIZON), None).map_err(|e| e.to_string())?;
    let sup = match dim_esup(&p, DEFAULT_SOLVER_TOL) {
        Ok(r) => json!({"value": real_to_json(r.value), "formula": r.formula}),
        Err(e) => json!({"value": null, "reason": e.to_string()}),
    };
    let mean = dim_e(&p);
    let inf = dim_einf(&p);
    Ok(json!({
        "psi": expr,
        "case": p.case_tag,
        "profile": p,
        "sup": sup,
        "mean": {"value": real_to_json(mean.value), "formula": mean.formula},
        "inf": {"value": real_to_json(inf.value), "formula": inf.formula},
    }))
}

/// Cylinder of a comma-separated digit word.
pub fn value_of_digits(text: &str) -> Result<Value, String> {
    let ds: Vec<u64> = text
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("not a digit: {t:?}")))
        .collect::<Result<_, _>>()?;
    let seq = DigitSeq::from_u64s(&ds).map_err(|e| e.to_string())?;
    let c = cylinder(&seq).map_err(|e| e.to_string())?;
    Ok(json!({"left": c.left.to_string(), "right": c.right.to_string(), "left_f64": float(&c.left)}))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = expand)]
pub fn expand_js(x: &str, n: usize) -> Result<String, JsError> {
    to_js(expansion(x, n))
}

#[wasm_bindgen(js_name = dimensionCurves)]
pub fn curves_js(max_m: u32, alpha_max: f64, steps: u32) -> Result<String, JsError> {
    to_js(curves(u64::from(max_m), alpha_max, steps))
}

#[wasm_bindgen(js_name = solveG)]
pub fn g_js(b: f64) -> Result<String, JsError> {
    to_js(g_of(b))
}

#[wasm_bindgen(js_name = psiDimensions)]
pub fn psi_js(expr: &str, horizon: u32) -> Result<String, JsError> {
    to_js(psi_dimensions(expr, u64::from(horizon)))
}

#[wasm_bindgen(js_name = cylinderOf)]
pub fn cylinder_js(digits: &str) -> Result<String, JsError> {
    to_js(value_of_digits(digits))
}
