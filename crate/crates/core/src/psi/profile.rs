//! Finite-horizon estimates of the growth invariants of ψ.
//!
//! Limits inferior and superior are approximated by infima and suprema over a
//! tail window `[n₀, N]`. Everything is computed from `ln ψ(n)`, so functions
//! whose values overflow binary64 still have well-defined profiles.

use serde::{Deserialize, Serialize};

use super::Psi;
use crate::error::{Error, Result};
use crate::numeric::LogSum;
use crate::serde_ext::ext_f64;

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_HORIZON: u64 = 10_000;

/// Increment bands narrower than this replace the raw `ln ψ(n)/n` ratios.
const INCREMENT_BAND: f64 = 0.031_622_776_601_683_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    I,
    II,
    III,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

/// How `log_a` / `log_v` were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogMethod {
    /// Tail band of `ln ψ(n+1) − ln ψ(n)`, which shares its limit with
    /// `ln ψ(n)/n` whenever it converges and approaches it much faster.
    Increments,
    Ratios,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    #[serde(with = "ext_f64")]
    pub ratio: f64,
    /// `ln(ψ(n)/n)`, finite even when the ratio overflows.
    pub ln_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub horizon: u64,
    pub tail_start: u64,
    /// Tail inf / sup of ψ(n)/n.
    #[serde(with = "ext_f64")]
    pub alpha_lo: f64,
    #[serde(with = "ext_f64")]
    pub alpha_hi: f64,
    /// Estimates of `ln A` and `ln V`.
    #[serde(rename = "logA", with = "ext_f64")]
    pub log_a: f64,
    #[serde(rename = "logV", with = "ext_f64")]
    pub log_v: f64,
    pub log_method: LogMethod,
    /// Raw tail inf / sup of `ln ψ(n)/n`.
    #[serde(with = "ext_f64")]
    pub log_ratio_lo: f64,
    #[serde(with = "ext_f64")]
    pub log_ratio_hi: f64,
    #[serde(with = "ext_f64")]
    pub increment_lo: f64,
    #[serde(with = "ext_f64")]
    pub increment_hi: f64,
    /// Tail sup of ψ(n+1)/(ψ(1)+…+ψ(n)); `+inf` when it overflows.
    #[serde(with = "ext_f64")]
    pub eta: f64,
    pub case_tag: CaseTag,
    pub positivity_ok: bool,
    pub divergence_ok: bool,
    pub nondecreasing_tail: bool,
    /// ψ(n)/n at N/8, N/4, N/2 and N.
    pub checkpoints: Vec<Checkpoint>,
    /// ψ(n)/n band on the preceding window `[⌈N/4⌉, n₀)`.
    #[serde(with = "ext_f64")]
    pub prev_alpha_lo: f64,
    #[serde(with = "ext_f64")]
    pub prev_alpha_hi: f64,
}

impl GrowthProfile {
    pub fn alpha_mid(&self) -> f64 {
        0.5 * (self.alpha_lo + self.alpha_hi)
    }

    pub fn alpha_width(&self) -> f64 {
        self.alpha_hi - self.alpha_lo
    }
}

fn ln_table(psi: &Psi, horizon: u64) -> Result<Vec<f64>> {
    (1..=horizon).map(|n| psi.ln(n)).collect()
}

fn min_max(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    })
}

/// Samples ψ on `[1, N]` and summarises the tail `[n₀, N]`; `n₀` defaults
/// to `⌈N/2⌉`.
pub fn growth_profile(psi: &Psi, horizon: u64, tail_start: Option<u64>) -> Result<GrowthProfile> {
    let n0 = tail_start.unwrap_or(horizon.div_ceil(2));
    if n0 < 2 || n0 >= horizon {
        return Err(Error::Domain(format!(
            "tail start {n0} must satisfy 2 <= n0 < horizon = {horizon}"
        )));
    }
    let ln = ln_table(psi, horizon)?;
    let ln_at = |n: u64| ln[n as usize - 1];
    let alpha = |n: u64| (ln_at(n) - (n as f64).ln()).exp();

    let (alpha_lo, alpha_hi) = min_max((n0..=horizon).map(alpha));
    let (log_ratio_lo, log_ratio_hi) = min_max((n0..=horizon).map(|n| ln_at(n) / n as f64));
    let (increment_lo, increment_hi) = min_max((n0..horizon).map(|n| ln_at(n + 1) - ln_at(n)));
    let (log_method, log_a, log_v) = if increment_hi - increment_lo <= INCREMENT_BAND {
        (LogMethod::Increments, increment_lo, increment_hi)
    } else {
        (LogMethod::Ratios, log_ratio_lo, log_ratio_hi)
    };

    let mut prefix = LogSum::new();
    let mut ln_eta = f64::NEG_INFINITY;
    for n in 1..horizon {
        prefix.add_ln(ln_at(n));
        if n >= n0 {
            ln_eta = ln_eta.max(ln_at(n + 1) - prefix.ln());
        }
    }
    let eta = ln_eta.exp();

    let head_min = (1..n0).map(ln_at).fold(f64::INFINITY, f64::min);
    let tail_min = (n0..=horizon).map(ln_at).fold(f64::INFINITY, f64::min);
    let nondecreasing_tail = (n0..horizon).all(|n| ln_at(n + 1) >= ln_at(n));

    let checkpoints = [horizon / 8, horizon / 4, horizon / 2, horizon]
        .into_iter()
        .map(|n| n.max(1))
        .map(|n| Checkpoint {
            n,
            ratio: alpha(n),
            ln_ratio: ln_at(n) - (n as f64).ln(),
        })
        .collect();
    let prev_start = horizon.div_ceil(4).clamp(1, n0 - 1);
    let (prev_alpha_lo, prev_alpha_hi) = min_max((prev_start..n0).map(alpha));

    let mut profile = GrowthProfile {
        horizon,
        tail_start: n0,
        alpha_lo,
        alpha_hi,
        log_a,
        log_v,
        log_method,
        log_ratio_lo,
        log_ratio_hi,
        increment_lo,
        increment_hi,
        eta,
        case_tag: CaseTag::Inconclusive,
        positivity_ok: true,
        divergence_ok: tail_min > head_min,
        nondecreasing_tail,
        checkpoints,
        prev_alpha_lo,
        prev_alpha_hi,
    };
    profile.case_tag = classify_case(&profile, DEFAULT_TOL);
    Ok(profile)
}

/// Numeric case split; anything not clearly in one case is inconclusive.
///
/// * I: ψ(n)/n strictly decreasing across the checkpoints and
///   `alpha_hi < √tol`.
/// * III: `alpha_lo > 1/tol` and strictly increasing across the checkpoints.
/// * II: the band lies in `[tol, 1/tol]`, is no wider than `√tol·max(1, α)`,
///   and agrees with the preceding window to the same width.
pub fn classify_case(p: &GrowthProfile, tol: f64) -> CaseTag {
    let r: Vec<f64> = p.checkpoints.iter().map(|c| c.ln_ratio).collect();
    let decreasing = r.windows(2).all(|w| w[1] < w[0]);
    let increasing = r.windows(2).all(|w| w[1] > w[0]);
    let band = tol.sqrt();
    if decreasing && p.alpha_hi < band {
        return CaseTag::I;
    }
    if increasing && p.alpha_lo > 1.0 / tol {
        return CaseTag::III;
    }
    let alpha = p.alpha_mid();
    let width = band * alpha.max(1.0);
    let in_range = |x: f64| (tol..=1.0 / tol).contains(&x);
    if in_range(p.alpha_lo)
        && in_range(p.alpha_hi)
        && p.alpha_width() <= width
        && (p.alpha_hi - p.prev_alpha_hi).abs() <= width
        && (p.alpha_lo - p.prev_alpha_lo).abs() <= width
    {
        return CaseTag::II;
    }
    CaseTag::Inconclusive
}

/// θ(n) = min_{n ≤ k ≤ N} ψ(k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub n: u64,
    #[serde(with = "ext_f64")]
    pub value: f64,
    pub ln_value: f64,
    /// Set unless ψ is nondecreasing on `[⌈N/2⌉, N]`, in which case the
    /// truncated minimum equals the true one.
    pub horizon_sensitive: bool,
}

/// `ln θ(n)` for every `n ∈ [1, N]`, by suffix minima, with the
/// horizon-sensitivity flag.
pub fn theta_ln_table(psi: &Psi, horizon: u64) -> Result<(Vec<f64>, bool)> {
    let ln = ln_table(psi, horizon)?;
    let mut out = ln.clone();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].min(out[i + 1]);
    }
    let start = (horizon.div_ceil(2) as usize).max(1) - 1;
    let nondecreasing = ln[start..].windows(2).all(|w| w[1] >= w[0]);
    Ok((out, !nondecreasing))
}

pub fn theta(psi: &Psi, n: u64, horizon: u64) -> Result<Theta> {
    if n == 0 || n > horizon {
        return Err(Error::Domain(format!(
            "theta needs 1 <= n <= horizon, got n = {n}"
        )));
    }
    let (table, horizon_sensitive) = theta_ln_table(psi, horizon)?;
    let ln_value = table[n as usize - 1];
    Ok(Theta {
        n,
        value: ln_value.exp(),
        ln_value,
        horizon_sensitive,
    })
}
