//! Dimension equations and the growth-rate dimension formulas.
//!
//! Every root is found by bisection: each sum is strictly decreasing in the
//! exponent `s`, so a sign change certifies the bracket.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numeric::{bisect_decreasing, Bisection, CompensatedSum};
use crate::powersum::{ln_range_sum, ln_tail_sum, tail_integral_bound, EM_START};
use crate::psi::{CaseTag, GrowthProfile};
use crate::serde_ext::{ext_f64, real_to_json};

pub const DEFAULT_SOLVER_TOL: f64 = 1e-12;
/// Terms of `G(B)` summed directly before the asymptotic tail takes over.
pub const DEFAULT_TRUNCATION: u64 = EM_START;

/// Which equation or formula produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    #[serde(rename = "S_M")]
    BoundedDigits,
    #[serde(rename = "G_MB")]
    ScaledBounded,
    #[serde(rename = "G_B")]
    Scaled,
    #[serde(rename = "H_alpha")]
    LinearRate,
    #[serde(rename = "thm1.1-i")]
    SupSublinear,
    #[serde(rename = "thm1.1-ii")]
    SupLinear,
    #[serde(rename = "thm1.1-iii")]
    SupSuperlinear,
    #[serde(rename = "thm1.2")]
    Mean,
    #[serde(rename = "thm1.3")]
    Inf,
    #[serde(rename = "moran")]
    Moran,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    /// Asymptotic tail included in the infinite sum, at the root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_estimate: Option<f64>,
    /// Integral upper bound on the same tail, at the root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_sensitive: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A dimension value with the inputs and solver state that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimReport {
    #[serde(with = "ext_f64")]
    pub value: f64,
    pub formula: Formula,
    pub residual: Option<f64>,
    pub inputs: Value,
    pub diagnostics: Diagnostics,
}

impl DimReport {
    fn closed_form(value: f64, formula: Formula, inputs: Value) -> DimReport {
        DimReport {
            value,
            formula,
            residual: None,
            inputs,
            diagnostics: Diagnostics::default(),
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Root of `e^{g(s)} − 1` on `[lo, hi]` for a decreasing log-sum `g`.
fn solve_log_equation<F: Fn(f64) -> f64>(ln_sum: F, lo: f64, hi: f64, tol: f64) -> Bisection {
    let f = |s: f64| ln_sum(s).exp_m1();
    let at_lo = f(lo);
    if at_lo <= 0.0 {
        return Bisection {
            root: lo,
            residual: at_lo.abs(),
            iterations: 0,
            lo,
            hi: lo,
        };
    }
    bisect_decreasing(f, lo, hi, tol)
}

fn root_report(b: Bisection, formula: Formula, inputs: Value) -> DimReport {
    DimReport {
        value: b.root,
        formula,
        residual: Some(b.residual),
        inputs,
        diagnostics: Diagnostics {
            iterations: Some(b.iterations),
            bracket: Some([b.lo, b.hi]),
            ..Diagnostics::default()
        },
    }
}

/// Root of `Σ_{k=2}^{M} (B·k(k−1))^{−s} = 1`.
pub fn solve_gmb(m: u64, b: f64, tol: f64) -> Result<DimReport> {
    check_tol(tol)?;
    if m < 2 {
        return Err(Error::Domain(format!("M must be at least 2, got {m}")));
    }
    if !(b >= 1.0 && b.is_finite()) {
        return Err(Error::Domain(format!(
            "B must be a finite real >= 1, got {b}"
        )));
    }
    let ln_b = b.ln();
    let hi = BigUint::from(m);
    let lo = BigUint::from(2u32);
    let r = solve_log_equation(|s| -s * ln_b + ln_range_sum(&lo, &hi, s), 0.0, 1.0, tol);
    Ok(root_report(
        r,
        Formula::ScaledBounded,
        json!({"M": m, "B": b, "tol": tol}),
    ))
}

/// `S(M)`: root of `Σ_{k=2}^{M} (k(k−1))^{−s} = 1`; the `B = 1` case of
/// [`solve_gmb`].
pub fn solve_sm(m: u64, tol: f64) -> Result<DimReport> {
    let mut r = solve_gmb(m, 1.0, tol)?;
    r.formula = Formula::BoundedDigits;
    r.inputs = json!({"M": m, "tol": tol});
    Ok(r)
}

fn solve_g_ln(ln_b: f64, tol: f64, k: u64) -> Bisection {
    solve_log_equation(|s| -s * ln_b + ln_tail_sum(2, k, s), 0.5, 1.0, tol)
}

fn g_report(r: Bisection, k: u64, inputs: Value) -> DimReport {
    let kk = k.max(EM_START - 1);
    let s = r.root;
    let direct: CompensatedSum = (2..=kk).map(|d| ((d * (d - 1)) as f64).powf(-s)).collect();
    let total = ln_tail_sum(2, kk, s).exp();
    let mut report = root_report(r, Formula::Scaled, inputs);
    report.diagnostics.truncation_k = Some(kk);
    report.diagnostics.tail_estimate = Some(total - direct.value());
    report.diagnostics.tail_bound = Some(tail_integral_bound(kk, s));
    report
}

/// `G(B)`: root in `(1/2, 1)` of `Σ_{k≥2} (B·k(k−1))^{−s} = 1`, with `K`
/// directly summed terms.
pub fn solve_gb_with(b: f64, tol: f64, k: u64) -> Result<DimReport> {
    check_tol(tol)?;
    if !(b > 1.0) || b.is_nan() {
        return Err(Error::Domain(format!("B must exceed 1, got {b}")));
    }
    if b.is_infinite() {
        return Err(Error::Domain("B is not finite; use the log form".into()));
    }
    let r = solve_g_ln(b.ln(), tol, k);
    Ok(g_report(r, k, json!({"B": b, "tol": tol, "K": k})))
}

pub fn solve_gb(b: f64, tol: f64) -> Result<DimReport> {
    solve_gb_with(b, tol, DEFAULT_TRUNCATION)
}

/// `H(α) = G(e^α)`; for `e^α` beyond binary64 the equation is solved with
/// `ln B = α` directly.
pub fn h_alpha(alpha: f64, tol: f64) -> Result<DimReport> {
    check_tol(tol)?;
    if !(alpha > 0.0) || alpha.is_infinite() {
        return Err(Error::Domain(format!(
            "alpha must be a positive real, got {alpha}"
        )));
    }
    let b = alpha.exp();
    let mut r = if b.is_finite() {
        solve_gb(b, tol)?
    } else {
        g_report(
            solve_g_ln(alpha, tol, DEFAULT_TRUNCATION),
            DEFAULT_TRUNCATION,
            json!({}),
        )
    };
    r.formula = Formula::LinearRate;
    r.inputs = json!({"alpha": alpha, "B": real_to_json(b), "tol": tol});
    Ok(r)
}

fn profile_inputs(p: &GrowthProfile) -> Value {
    json!({
        "horizon": p.horizon,
        "tail_start": p.tail_start,
        "case_tag": p.case_tag,
        "alpha_lo": real_to_json(p.alpha_lo),
        "alpha_hi": real_to_json(p.alpha_hi),
        "logA": real_to_json(p.log_a),
        "logV": real_to_json(p.log_v),
        "eta": real_to_json(p.eta),
    })
}

/// `1/(1+e^x)`, equal to 0 when `e^x` is infinite.
fn one_over_one_plus_exp(x: f64) -> f64 {
    let v = x.exp();
    if v.is_infinite() {
        0.0
    } else {
        1.0 / (1.0 + v)
    }
}

/// Dimension of the set where `limsup log d_n / ψ(n) = 1`.
pub fn dim_esup(p: &GrowthProfile, tol: f64) -> Result<DimReport> {
    let inputs = profile_inputs(p);
    match p.case_tag {
        CaseTag::I => Ok(DimReport::closed_form(1.0, Formula::SupSublinear, inputs)),
        CaseTag::II => {
            let alpha = p.alpha_mid();
            let mut r = h_alpha(alpha, tol)?;
            r.formula = Formula::SupLinear;
            r.inputs = inputs;
            r.diagnostics.band_width = Some(p.alpha_width());
            if p.alpha_width() > 10.0 * tol {
                r.diagnostics.warnings.push(format!(
                    "alpha band width {:.3e} exceeds 10*tol",
                    p.alpha_width()
                ));
            }
            if p.alpha_hi > 2.0 * p.alpha_lo {
                r.diagnostics.warnings.push(
                    "limsup of psi(n)/n well above the liminf; case detection is fragile".into(),
                );
            }
            Ok(r)
        }
        CaseTag::III => {
            let mut r = DimReport::closed_form(
                one_over_one_plus_exp(p.log_a),
                Formula::SupSuperlinear,
                inputs,
            );
            r.diagnostics
                .notes
                .push(format!("log A from {:?}", p.log_method).to_lowercase());
            Ok(r)
        }
        CaseTag::Inconclusive => Err(Error::Inconclusive(
            "psi(n)/n fits none of the three cases (limit 0, finite positive limit, divergence); \
             no dimension formula covers e.g. liminf psi(n)/n = 0 < limsup"
                .into(),
        )),
    }
}

/// Dimension of the set where `lim log d_n / ψ(n) = 1`: `1/(2+η)`.
pub fn dim_e(p: &GrowthProfile) -> DimReport {
    let value = if p.eta.is_infinite() {
        0.0
    } else {
        1.0 / (2.0 + p.eta)
    };
    DimReport::closed_form(value, Formula::Mean, profile_inputs(p))
}

/// Dimension of the set where `liminf log d_n / ψ(n) = 1`: `1/(1+V)`.
pub fn dim_einf(p: &GrowthProfile) -> DimReport {
    DimReport::closed_form(
        one_over_one_plus_exp(p.log_v),
        Formula::Inf,
        profile_inputs(p),
    )
}

/// Tail infimum over `n ∈ [⌈N/2⌉, N]` of
/// `log(u_1⋯u_n) / (2 log(u_1⋯u_n) + log u_{n+1})`, from `ln u_n`.
pub fn moran_dim(ln_u: &[f64], horizon: usize) -> Result<DimReport> {
    if horizon == 0 || ln_u.len() < horizon + 1 {
        return Err(Error::Domain(format!(
            "moran_dim needs u_1..u_(N+1) for N = {horizon}, got {} values",
            ln_u.len()
        )));
    }
    let ln4 = 4f64.ln();
    if let Some(i) = ln_u[..=horizon].iter().position(|&l| !(l >= ln4)) {
        return Err(Error::Domain(format!(
            "u_{} < 4 violates the lower bound",
            i + 1
        )));
    }
    let start = horizon.div_ceil(2).max(1);
    let mut prefix = CompensatedSum::new();
    let mut best = f64::INFINITY;
    let mut at = start;
    for n in 1..=horizon {
        prefix.add(ln_u[n - 1]);
        if n >= start {
            let p = prefix.value();
            let r = p / (2.0 * p + ln_u[n]);
            if r < best {
                best = r;
                at = n;
            }
        }
    }
    let mut r = DimReport::closed_form(
        best,
        Formula::Moran,
        json!({"horizon": horizon, "tail_start": start}),
    );
    r.diagnostics
        .notes
        .push(format!("tail infimum attained at n = {at}"));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::{growth_profile, Psi};

    const TOL: f64 = DEFAULT_SOLVER_TOL;

    fn brute_s(m: u64, s: f64) -> f64 {
        (2..=m).map(|k| ((k * (k - 1)) as f64).powf(-s)).sum()
    }

    #[test]
    fn bounded_digit_roots() {
        assert_eq!(solve_sm(2, TOL).unwrap().value, 0.0);
        let s3 = solve_sm(3, TOL).unwrap();
        assert!(s3.value > 0.59 && s3.value < 0.61);
        assert!(s3.residual.unwrap() <= 1e-10);
        // independent oracle: the bracket flips sign
        assert!(brute_s(3, 0.59) > 1.0 && brute_s(3, 0.61) < 1.0);
        assert!(solve_sm(4, TOL).unwrap().value > s3.value);
        assert!(solve_sm(1, TOL).is_err());
    }

    #[test]
    fn bounded_is_scaled_with_unit_base() {
        for m in [2u64, 3, 7, 100] {
            assert_eq!(
                solve_sm(m, TOL).unwrap().value,
                solve_gmb(m, 1.0, TOL).unwrap().value
            );
        }
        assert!(solve_gmb(10, 3.0, TOL).unwrap().value < solve_sm(10, TOL).unwrap().value);
    }

    #[test]
    fn scaled_roots() {
        let g = solve_gb(1e6, TOL).unwrap();
        assert!(g.value > 0.5 && g.value < 0.55);
        let g = solve_gb(1.0 + 1e-4, TOL).unwrap();
        assert!(g.value > 0.95);
        assert!(solve_gb(1.0, TOL).is_err());
        let e = std::f64::consts::E;
        assert_eq!(
            solve_gb(e, TOL).unwrap().value,
            h_alpha(1.0, TOL).unwrap().value
        );
    }

    #[test]
    fn linear_rate_limits() {
        assert!(h_alpha(1e-4, TOL).unwrap().value > 0.95);
        let v = h_alpha(20.0, TOL).unwrap().value;
        assert!(v > 0.5 && v < 0.51);
        let big = h_alpha(1000.0, TOL).unwrap();
        assert!(big.value >= 0.5 && big.value < 0.5 + 1e-9);
        assert!(h_alpha(0.0, TOL).is_err());
        let mut last = 1.0;
        for a in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let v = h_alpha(a, TOL).unwrap().value;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn truncation_doubling_is_stable() {
        for b in [1.5, 10.0, 1e6] {
            let a = solve_gb_with(b, TOL, 20_000).unwrap().value;
            let c = solve_gb_with(b, TOL, 40_000).unwrap().value;
            assert!((a - c).abs() < 1e-10, "B = {b}");
        }
    }

    #[test]
    fn growth_formulas() {
        let prof = |t: &str, n: u64| growth_profile(&Psi::parse(t).unwrap(), n, None).unwrap();
        assert_eq!(dim_esup(&prof("sqrt(n)", 10_000), TOL).unwrap().value, 1.0);
        let lin = dim_esup(&prof("3*n", 10_000), TOL).unwrap();
        assert_eq!(lin.formula, Formula::SupLinear);
        assert!((lin.value - h_alpha(3.0, TOL).unwrap().value).abs() < 1e-10);
        let sup = dim_esup(&prof("n*2^n", 1000), TOL).unwrap();
        assert!((sup.value - 1.0 / 3.0).abs() < 1e-3, "{}", sup.value);
        let sq = prof("n^2", 10_000);
        assert!((dim_e(&sq).value - 0.5).abs() < 1e-3);
        assert!((dim_einf(&sq).value - 0.5).abs() < 1e-3);
        assert!((dim_e(&prof("2^n", 10_000)).value - 1.0 / 3.0).abs() < 1e-6);
        let e = std::f64::consts::E;
        assert!((dim_einf(&prof("exp(n)", 10_000)).value - 1.0 / (1.0 + e)).abs() < 1e-6);
        let fast = prof("exp(n^2)", 10_000);
        assert_eq!(dim_e(&fast).value, 0.0);
        assert_eq!(dim_einf(&fast).value, 0.0);
    }

    #[test]
    fn inconclusive_is_refused() {
        let t: Vec<f64> = (1..=2000)
            .map(|n| n as f64 * (2.0 + (n as f64).sin()))
            .collect();
        let p = growth_profile(&Psi::table(t), 2000, None).unwrap();
        assert!(matches!(dim_esup(&p, TOL), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn moran_examples() {
        let five = vec![5f64.ln(); 1001];
        assert!((moran_dim(&five, 1000).unwrap().value - 0.5).abs() < 1e-3);
        let dbl: Vec<f64> = (1..=51).map(|n| 2f64.powi(n) * 2f64.ln()).collect();
        assert!((moran_dim(&dbl, 50).unwrap().value - 1.0 / 3.0).abs() < 1e-6);
        let mut bad = vec![4f64.ln(); 11];
        bad[0] = 3f64.ln();
        assert!(matches!(moran_dim(&bad, 10), Err(Error::Domain(_))));
        assert!(moran_dim(&vec![4f64.ln(); 11], 10).is_ok());
    }

    #[test]
    fn report_serialises() {
        let r = solve_sm(3, TOL).unwrap();
        let v: Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["formula"], "S_M");
        for key in ["value", "formula", "residual", "inputs", "diagnostics"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
