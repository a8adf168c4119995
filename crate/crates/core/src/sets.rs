//! Cantor-type digit schedules, the auxiliary sequences that define them,
//! point samplers, and exhaustive checkers for the distortion and gap
//! estimates used by the constructions.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expansion::{value_of, DigitSeq, Rational};
use crate::numeric::{ln_biguint, ln_sub_exp, LogSum};
use crate::psi::{floor_exp_f64, floor_f64, Psi};
use crate::rng::CounterRng;
use crate::serde_ext::{big_pairs, ext_f64};

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_WORD_GUARD: u64 = 1_000_000;
pub const DEFAULT_PAIR_GUARD: u64 = 10_000_000;
/// Largest `ln c` accepted for a center `c`; `⌊c⌋` then has about 1.4·10⁶ bits.
pub const LN_CENTER_GUARD: f64 = 1e6;

/// `t(n) = #{k ≥ 1 : 2^k ≤ n}`.
pub fn t_of(n: u64) -> u32 {
    if n < 2 {
        0
    } else {
        63 - n.leading_zeros()
    }
}

fn is_power_of_two_level(n: usize) -> bool {
    n >= 2 && n.is_power_of_two()
}

/// Per-level admissible digit ranges `[lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitSchedule {
    pub label: String,
    pub params: Value,
    #[serde(with = "big_pairs")]
    pub ranges: Vec<(BigUint, BigUint)>,
    /// 1-based levels whose digit is forced by the construction.
    pub pinned: Vec<usize>,
}

impl DigitSchedule {
    pub fn new(
        label: &str,
        params: Value,
        ranges: Vec<(BigUint, BigUint)>,
        pinned: Vec<usize>,
    ) -> Result<Self> {
        let two = BigUint::from(2u32);
        for (i, (lo, hi)) in ranges.iter().enumerate() {
            if *lo < two || lo > hi {
                return Err(Error::Domain(format!(
                    "level {} has inadmissible range [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        Ok(DigitSchedule {
            label: label.to_string(),
            params,
            ranges,
            pinned,
        })
    }

    /// The same range `[lo, hi]` at every one of `depth` levels.
    pub fn constant(lo: u64, hi: u64, depth: usize) -> Result<Self> {
        let ranges = vec![(BigUint::from(lo), BigUint::from(hi)); depth];
        DigitSchedule::new(
            "const",
            json!({"lo": lo, "hi": hi, "depth": depth}),
            ranges,
            vec![],
        )
    }

    pub fn depth(&self) -> usize {
        self.ranges.len()
    }

    pub fn width(&self, level: usize) -> BigUint {
        let (lo, hi) = &self.ranges[level - 1];
        hi - lo + 1u32
    }

    /// Number of words of length `depth`, saturating at `u64::MAX`.
    pub fn word_count(&self, depth: usize) -> u64 {
        let mut total = BigUint::one();
        for n in 1..=depth.min(self.depth()) {
            total *= self.width(n);
        }
        total.to_u64().unwrap_or(u64::MAX)
    }

    fn check_depth(&self, depth: usize) -> Result<()> {
        if depth > self.depth() {
            return Err(Error::Domain(format!(
                "depth {depth} exceeds the schedule depth {}",
                self.depth()
            )));
        }
        Ok(())
    }
}

/// Digits in `[2, M]`, with level `2^k` pinned to `⌊e^{ψ(2^k)}⌋ + 1`.
pub fn schedule_em_psi(psi: &Psi, m: u64, depth: usize) -> Result<DigitSchedule> {
    if m < 2 {
        return Err(Error::Domain(format!("M must be at least 2, got {m}")));
    }
    let mut ranges = Vec::with_capacity(depth);
    let mut pinned = Vec::new();
    for n in 1..=depth {
        if is_power_of_two_level(n) {
            let d = psi.pinned_digit(n as u64)?;
            ranges.push((d.clone(), d));
            pinned.push(n);
        } else {
            ranges.push((BigUint::from(2u32), BigUint::from(m)));
        }
    }
    DigitSchedule::new(
        "em-psi",
        json!({"psi": psi.to_string(), "M": m, "depth": depth}),
        ranges,
        pinned,
    )
}

/// `n_1 = 1`, `n_{k+1} = (k+1)(n_1 + … + n_k)`, up to `depth`.
pub fn sparse_positions(depth: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut sum = 0usize;
    let mut next = 1usize;
    while next <= depth {
        out.push(next);
        sum += next;
        next = match sum.checked_mul(out.len() + 1) {
            Some(v) => v,
            None => break,
        };
    }
    out
}

/// Digits in `[⌊B^{n_k}⌋ + 2, 2⌊B^{n_k}⌋ + 1]` at the sparse positions and
/// `[2, M]` elsewhere.
pub fn schedule_fmb(b: &Rational, m: u64, depth: usize) -> Result<DigitSchedule> {
    if *b <= Rational::one() {
        return Err(Error::Domain(format!("B must exceed 1, got {b}")));
    }
    if m < 2 {
        return Err(Error::Domain(format!("M must be at least 2, got {m}")));
    }
    let positions = sparse_positions(depth);
    let mut ranges = vec![(BigUint::from(2u32), BigUint::from(m)); depth];
    for &n in &positions {
        let f = b
            .pow(n as i32)
            .floor()
            .to_integer()
            .to_biguint()
            .expect("positive");
        ranges[n - 1] = (&f + 2u32, &f * 2u32 + 1u32);
    }
    DigitSchedule::new(
        "f-mb",
        json!({"B": b.to_string(), "M": m, "depth": depth, "sparse_positions": positions}),
        ranges,
        vec![],
    )
}

/// `⌊c_n + 1⌋` from `ln c_n`, exactly.
pub fn floors_from_ln(ln_c: &[f64]) -> Result<Vec<BigUint>> {
    ln_c.iter()
        .map(|&y| {
            if y.is_nan() {
                return Err(Error::Domain("center is NaN".into()));
            }
            if y > LN_CENTER_GUARD {
                return Err(Error::Guard {
                    requested: format!("ln c = {y:e}"),
                    guard: LN_CENTER_GUARD as u64,
                });
            }
            Ok(floor_exp_f64(y)? + 1u32)
        })
        .collect()
}

/// `⌊c_n + 1⌋` from the centers themselves.
pub fn floors_from_values(c: &[f64]) -> Result<Vec<BigUint>> {
    c.iter()
        .enumerate()
        .map(|(i, &v)| {
            if !(v > 0.0) || v.is_infinite() {
                return Err(Error::Domain(format!(
                    "center c_{} = {v} must be positive and finite",
                    i + 1
                )));
            }
            Ok(floor_f64(v)? + 1u32)
        })
        .collect()
}

/// `⌊e^{ψ(n)} + 1⌋` for `n = 1..depth`, exactly.
pub fn floors_from_psi(psi: &Psi, depth: usize) -> Result<Vec<BigUint>> {
    (1..=depth as u64).map(|n| psi.pinned_digit(n)).collect()
}

/// Ranges `[M⌊c_n+1⌋, 2M⌊c_n+1⌋ − 1]` given `floors[n] = ⌊c_n + 1⌋`.
/// `m = 0` selects the least `M ≥ 1` with `M⌊c_n+1⌋ ≥ 4` at every level.
pub fn schedule_from_centers(
    label: &str,
    params: Value,
    floors: &[BigUint],
    m: u64,
) -> Result<DigitSchedule> {
    if let Some(i) = floors.iter().position(|f| f.is_zero()) {
        return Err(Error::Domain(format!(
            "center c_{} must be positive",
            i + 1
        )));
    }
    let m = if m == 0 {
        let min = floors.iter().min().cloned().unwrap_or_else(BigUint::one);
        let four = BigUint::from(4u32);
        if min >= four {
            1
        } else {
            4u64.div_ceil(min.to_u64().expect("below 4"))
        }
    } else {
        m
    };
    let ranges = floors
        .iter()
        .map(|f| {
            let lo = f * m;
            let hi = &lo * 2u32 - 1u32;
            (lo, hi)
        })
        .collect();
    let mut params = params;
    if let Value::Object(map) = &mut params {
        map.insert("M".into(), json!(m));
    }
    DigitSchedule::new(label, params, ranges, vec![])
}

/// `r_n` stored as `ln log r_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RSeq {
    pub a: f64,
    pub epsilon: f64,
    pub horizon: u64,
    pub ln_log: Vec<f64>,
    /// θ came from a truncated scan that might still drop past the horizon.
    pub horizon_sensitive: bool,
    /// Tail sup of `log r_n / ψ(n)`.
    #[serde(with = "ext_f64")]
    pub tail_sup_ratio_psi: f64,
    /// Sup over all `n` of `log r_{n+1} / Σ_{i≤n} log r_i`.
    #[serde(with = "ext_f64")]
    pub max_step_ratio: f64,
    /// The same supremum over the tail half.
    #[serde(with = "ext_f64")]
    pub tail_step_ratio: f64,
    /// `A − 1 + ε`.
    pub step_bound: f64,
    /// `ln log r_N`, to watch growth.
    pub last_ln_log: f64,
}

impl RSeq {
    pub fn log_r(&self) -> Vec<f64> {
        self.ln_log.iter().map(|l| l.exp()).collect()
    }
}

fn check_seq_inputs(
    name: &str,
    base: f64,
    epsilon: f64,
    length: usize,
    horizon: u64,
) -> Result<()> {
    if !(base >= 1.0) || !base.is_finite() {
        return Err(Error::Domain(format!(
            "{name} must be a finite real >= 1, got {base}"
        )));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if length == 0 || (horizon as usize) < length {
        return Err(Error::Domain(format!(
            "need 1 <= length <= horizon, got length {length} and horizon {horizon}"
        )));
    }
    Ok(())
}

/// `log r_1 = θ(1)`, `log r_n = min(θ(n), (A−1+ε)·Σ_{i<n} log r_i)`.
pub fn build_r_sequence(
    psi: &Psi,
    a: f64,
    epsilon: f64,
    length: usize,
    horizon: u64,
) -> Result<RSeq> {
    check_seq_inputs("A", a, epsilon, length, horizon)?;
    let (theta, horizon_sensitive) = crate::psi::theta_ln_table(psi, horizon)?;
    let ln_step = (a - 1.0 + epsilon).ln();
    let mut ln_log = Vec::with_capacity(length);
    let mut prefix = LogSum::new();
    let mut ln_prefix = Vec::with_capacity(length);
    for n in 0..length {
        let v = if n == 0 {
            theta[0]
        } else {
            theta[n].min(ln_step + prefix.ln())
        };
        ln_log.push(v);
        prefix.add_ln(v);
        ln_prefix.push(prefix.ln());
    }
    let tail = length.div_ceil(2).max(1);
    let mut tail_sup_ratio_psi = f64::NEG_INFINITY;
    for n in tail..=length {
        tail_sup_ratio_psi = tail_sup_ratio_psi.max((ln_log[n - 1] - psi.ln(n as u64)?).exp());
    }
    let step = |n: usize| (ln_log[n] - ln_prefix[n - 1]).exp();
    let max_step_ratio = (1..length).map(step).fold(f64::NEG_INFINITY, f64::max);
    let tail_step_ratio = (tail.max(1)..length)
        .map(step)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RSeq {
        a,
        epsilon,
        horizon,
        last_ln_log: ln_log[length - 1],
        ln_log,
        horizon_sensitive,
        tail_sup_ratio_psi,
        max_step_ratio,
        tail_step_ratio,
        step_bound: a - 1.0 + epsilon,
    })
}

/// `L_n(ε)` stored as `ln log L_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LSeq {
    pub v: f64,
    pub epsilon: f64,
    pub horizon: u64,
    pub ln_log: Vec<f64>,
    /// Index `j` attaining each supremum.
    pub argmax: Vec<u64>,
    pub horizon_sensitive: bool,
    /// Min over `n` of `log L_n − ψ(n)`, in units of `ψ(n)` (never negative).
    pub min_excess: f64,
    /// Max over `n` of `(log L_{n+1} − log L_1) / ((V+ε−1) Σ_{i≤n} log L_i) − 1`.
    #[serde(with = "ext_f64")]
    pub recursion_excess: f64,
}

/// `log L_n = sup_{n ≤ j ≤ horizon} ψ(j)(V+ε)^{n−j}`, by the exact backward
/// recursion `log L_n = max(ψ(n), log L_{n+1}/(V+ε))`.
pub fn build_l_sequence(
    psi: &Psi,
    v: f64,
    epsilon: f64,
    length: usize,
    horizon: u64,
) -> Result<LSeq> {
    check_seq_inputs("V", v, epsilon, length, horizon)?;
    let h = horizon as usize;
    let ln_psi: Vec<f64> = (1..=horizon).map(|n| psi.ln(n)).collect::<Result<_>>()?;
    let ln_rate = (v + epsilon).ln();
    let mut ln_log = vec![0.0; h];
    let mut argmax = vec![0u64; h];
    ln_log[h - 1] = ln_psi[h - 1];
    argmax[h - 1] = horizon;
    for i in (0..h - 1).rev() {
        let carried = ln_log[i + 1] - ln_rate;
        if ln_psi[i] >= carried {
            ln_log[i] = ln_psi[i];
            argmax[i] = i as u64 + 1;
        } else {
            ln_log[i] = carried;
            argmax[i] = argmax[i + 1];
        }
    }
    let growing_at_horizon = h >= 2 && ln_psi[h - 1] - ln_psi[h - 2] >= ln_rate;
    let horizon_sensitive = growing_at_horizon
        || argmax[..length]
            .iter()
            .enumerate()
            .any(|(i, &j)| j == horizon && i + 1 < h);
    ln_log.truncate(length);
    argmax.truncate(length);

    let min_excess = (0..length)
        .map(|i| (ln_log[i] - ln_psi[i]).exp_m1())
        .fold(f64::INFINITY, f64::min);

    let ln_coeff = (v + epsilon - 1.0).ln();
    let mut prefix = LogSum::new();
    let mut recursion_excess = f64::NEG_INFINITY;
    for n in 1..length {
        prefix.add_ln(ln_log[n - 1]);
        if ln_log[n] > ln_log[0] {
            let lhs = ln_sub_exp(ln_log[n], ln_log[0]);
            recursion_excess = recursion_excess.max((lhs - ln_coeff - prefix.ln()).exp_m1());
        } else {
            recursion_excess = recursion_excess.max(-1.0);
        }
    }
    Ok(LSeq {
        v,
        epsilon,
        horizon,
        ln_log,
        argmax,
        horizon_sensitive,
        min_excess,
        recursion_excess,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    Min,
    Max,
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePoint {
    #[serde(serialize_with = "ser_rational")]
    pub x: Rational,
    pub digits: DigitSeq,
}

fn ser_rational<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Uniform integer in `[0, w)`: a 64×64-bit multiply-high for `w < 2⁶⁴`
/// (bias below `w/2⁶⁴`), otherwise `k+1` words reduced mod `w` for a
/// `k`-word `w`.
fn uniform_below(rng: &CounterRng, stream: u64, level: u64, w: &BigUint) -> BigUint {
    if let Some(w64) = w.to_u64() {
        let word = rng.word_at(stream, level);
        return BigUint::from(((u128::from(word) * u128::from(w64)) >> 64) as u64);
    }
    let words = w.bits().div_ceil(64) + 1;
    let mut acc = BigUint::zero();
    for i in 0..words {
        acc = (acc << 64usize) + rng.derive(i).word_at(stream, level);
    }
    acc % w
}

/// One point of the set: the digit at level `n` is the range minimum, the
/// maximum, or drawn from counter `(stream, n)` of the seeded generator.
pub fn sample_point_stream(
    schedule: &DigitSchedule,
    depth: usize,
    mode: SampleMode,
    seed: u64,
    stream: u64,
) -> Result<SamplePoint> {
    schedule.check_depth(depth)?;
    let rng = CounterRng::new(seed);
    let digits: Vec<BigUint> = schedule.ranges[..depth]
        .iter()
        .enumerate()
        .map(|(i, (lo, hi))| match mode {
            SampleMode::Min => lo.clone(),
            SampleMode::Max => hi.clone(),
            SampleMode::SeededRandom => {
                lo + uniform_below(&rng, stream, i as u64 + 1, &(hi - lo + 1u32))
            }
        })
        .collect();
    let digits = DigitSeq::new(digits)?;
    Ok(SamplePoint {
        x: value_of(&digits)?,
        digits,
    })
}

pub fn sample_point(
    schedule: &DigitSchedule,
    depth: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<SamplePoint> {
    sample_point_stream(schedule, depth, mode, seed, 0)
}

fn small_ranges(schedule: &DigitSchedule, depth: usize) -> Result<Vec<(u64, u64)>> {
    schedule.ranges[..depth]
        .iter()
        .map(|(lo, hi)| match (lo.to_u64(), hi.to_u64()) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Guard {
                requested: "digit beyond 64 bits in an enumerated level".into(),
                guard: u64::MAX,
            }),
        })
        .collect()
}

fn check_guard(what: &str, count: u64, guard: u64) -> Result<()> {
    if count > guard {
        return Err(Error::Guard {
            requested: format!("{count} {what}"),
            guard,
        });
    }
    Ok(())
}

/// Visits every word of length `depth` (and every prefix) in lexicographic
/// order, passing the level and the digits so far.
fn for_each_prefix<F: FnMut(usize, &[u64])>(ranges: &[(u64, u64)], depth: usize, f: &mut F) {
    fn go<F: FnMut(usize, &[u64])>(
        ranges: &[(u64, u64)],
        depth: usize,
        word: &mut Vec<u64>,
        f: &mut F,
    ) {
        let n = word.len();
        if n > 0 {
            f(n, word);
        }
        if n == depth {
            return;
        }
        let (lo, hi) = ranges[n];
        for d in lo..=hi {
            word.push(d);
            go(ranges, depth, word, f);
            word.pop();
        }
    }
    go(ranges, depth, &mut Vec::with_capacity(depth), f);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionLevel {
    pub n: usize,
    pub words: u64,
    /// Min over words of `(1+ε)·log Q_n* / log Q_n`; the estimate
    /// `|I_n| ≥ |I_n*|^{1+ε}` holds for a word iff its ratio is ≥ 1.
    pub min_ratio: f64,
    pub violations: u64,
    pub worst_word: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub epsilon: String,
    pub depth: usize,
    pub exact: bool,
    pub levels: Vec<DistortionLevel>,
    pub min_ratio: f64,
    /// Least `n₀` such that every level in `[n₀, depth]` has no violation.
    pub holds_from: Option<usize>,
    pub violations: u64,
}

/// Exhaustively compares `|I_n|` with `|I_n*|^{1+ε}`, where `I_n*` drops the
/// digits at levels `2^k`. With `ε = p/q` (`q ≤ 4096`) the comparison is the
/// exact integer test `Q_n^q ≤ (Q_n*)^{p+q}`.
pub fn verify_distortion(
    schedule: &DigitSchedule,
    epsilon: &Rational,
    depth: usize,
    guard: u64,
) -> Result<DistortionReport> {
    schedule.check_depth(depth)?;
    if *epsilon <= Rational::zero() {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    check_guard("words", schedule.word_count(depth), guard)?;
    let ranges = small_ranges(schedule, depth)?;
    let eps_f = epsilon.to_f64().unwrap_or(f64::INFINITY);
    let exponents = match (epsilon.numer().to_u32(), epsilon.denom().to_u32()) {
        (Some(p), Some(q)) if q <= 4096 && p <= 1 << 16 => Some((q, p + q)),
        _ => None,
    };
    let mut levels: Vec<DistortionLevel> = (1..=depth)
        .map(|n| DistortionLevel {
            n,
            words: 0,
            min_ratio: f64::INFINITY,
            violations: 0,
            worst_word: vec![],
        })
        .collect();
    for_each_prefix(&ranges, depth, &mut |n, word| {
        let mut q = BigUint::one();
        let mut q_star = BigUint::one();
        for (i, &d) in word.iter().enumerate() {
            let f = BigUint::from(d) * (d - 1);
            if !is_power_of_two_level(i + 1) {
                q_star *= &f;
            }
            q *= f;
        }
        let ratio = (1.0 + eps_f) * ln_biguint(&q_star) / ln_biguint(&q);
        let holds = match exponents {
            Some((a, b)) => q.pow(a) <= q_star.pow(b),
            None => ratio >= 1.0,
        };
        let lvl = &mut levels[n - 1];
        lvl.words += 1;
        if !holds {
            lvl.violations += 1;
        }
        if ratio < lvl.min_ratio {
            lvl.min_ratio = ratio;
            lvl.worst_word = word.to_vec();
        }
    });
    let violations = levels.iter().map(|l| l.violations).sum();
    let holds_from = levels
        .iter()
        .rposition(|l| l.violations > 0)
        .map_or(Some(1), |i| (i + 2 <= depth).then_some(i + 2));
    Ok(DistortionReport {
        epsilon: epsilon.to_string(),
        depth,
        exact: exponents.is_some(),
        min_ratio: levels
            .iter()
            .map(|l| l.min_ratio)
            .fold(f64::INFINITY, f64::min),
        levels,
        holds_from,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub m: u64,
    pub depth: usize,
    pub words: u64,
    pub pairs: u64,
    /// Exact minimum of `dist · M³ / |I_n|` as `p/q`, absent when vacuous.
    pub min_ratio_exact: Option<String>,
    pub min_ratio: Option<f64>,
    pub worst_pair: Option<(Vec<u64>, Vec<u64>)>,
    pub violations: u64,
    pub pass: bool,
}

/// Exhaustive pairwise gap check. Each depth-`D` word stands for the hull of
/// its part of the set, `(left + 1/(Q_D·hi_{D+1}), left + 1/(Q_D·(lo_{D+1}−1))]`;
/// for every pair with common prefix length `n` the hull distance times
/// `M³·Q_n` must be at least 1.
pub fn verify_gap(
    schedule: &DigitSchedule,
    m: u64,
    depth: usize,
    word_guard: u64,
    pair_guard: u64,
) -> Result<GapReport> {
    if schedule.depth() < depth + 1 {
        return Err(Error::Domain(format!(
            "hulls at depth {depth} need a schedule of depth {}, got {}",
            depth + 1,
            schedule.depth()
        )));
    }
    let words_total = schedule.word_count(depth);
    check_guard("words", words_total, word_guard)?;
    check_guard(
        "pairs",
        words_total.saturating_mul(words_total.saturating_sub(1)) / 2,
        pair_guard,
    )?;
    let ranges = small_ranges(schedule, depth)?;
    let (next_lo, next_hi) = &schedule.ranges[depth];
    let next_lo = BigInt::from(next_lo.clone());
    let next_hi = BigInt::from(next_hi.clone());

    struct Hull {
        word: Vec<u64>,
        q_prefix: Vec<BigInt>,
        lo: Rational,
        hi: Rational,
    }
    let mut hulls = Vec::new();
    for_each_prefix(&ranges, depth, &mut |n, word| {
        if n < depth {
            return;
        }
        let seq = DigitSeq::from_u64s(word).expect("admissible schedule");
        let left = value_of(&seq).expect("admissible");
        let mut q_prefix = vec![BigInt::one()];
        for &d in word {
            let next = q_prefix.last().unwrap() * BigInt::from(d) * BigInt::from(d - 1);
            q_prefix.push(next);
        }
        let q = q_prefix[depth].clone();
        let lo = &left + Rational::new(BigInt::one(), &q * &next_hi);
        let hi = &left + Rational::new(BigInt::one(), &q * (&next_lo - 1));
        hulls.push(Hull {
            word: word.to_vec(),
            q_prefix,
            lo,
            hi,
        });
    });

    let m3 = Rational::from_integer(BigInt::from(m).pow(3));
    let mut best: Option<(Rational, usize, usize)> = None;
    let mut pairs = 0u64;
    let mut violations = 0u64;
    for i in 0..hulls.len() {
        for j in i + 1..hulls.len() {
            let (a, b) = (&hulls[i], &hulls[j]);
            let n = a
                .word
                .iter()
                .zip(&b.word)
                .take_while(|(x, y)| x == y)
                .count();
            let gap = if a.hi <= b.lo {
                &b.lo - &a.hi
            } else if b.hi <= a.lo {
                &a.lo - &b.hi
            } else {
                Rational::zero()
            };
            let ratio = gap * &m3 * Rational::from_integer(a.q_prefix[n].clone());
            pairs += 1;
            if ratio < Rational::one() {
                violations += 1;
            }
            if best.as_ref().is_none_or(|(r, _, _)| ratio < *r) {
                best = Some((ratio, i, j));
            }
        }
    }
    Ok(GapReport {
        m,
        depth,
        words: hulls.len() as u64,
        pairs,
        min_ratio_exact: best.as_ref().map(|(r, _, _)| r.to_string()),
        min_ratio: best
            .as_ref()
            .map(|(r, _, _)| r.to_f64().unwrap_or(f64::INFINITY)),
        worst_pair: best
            .as_ref()
            .map(|(_, i, j)| (hulls[*i].word.clone(), hulls[*j].word.clone())),
        violations,
        pass: violations == 0,
    })
}

/// Positions `{2^k ≤ n}` removed to form the starred word.
pub fn starred_positions(n: usize) -> BTreeSet<usize> {
    (1..=t_of(n as u64)).map(|k| 1usize << k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{cylinder, eliminate};
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn t_examples() {
        assert_eq!(t_of(1), 0);
        assert_eq!(t_of(8), 3);
        assert_eq!(t_of(7), 2);
        assert_eq!(starred_positions(9), BTreeSet::from([2, 4, 8]));
    }

    #[test]
    fn em_psi_examples() {
        let s = schedule_em_psi(&Psi::parse("log(n+1)").unwrap(), 3, 5).unwrap();
        assert_eq!(s.pinned, vec![2, 4]);
        assert_eq!(s.ranges[1], (big(4), big(4)));
        assert_eq!(s.ranges[3], (big(6), big(6)));
        for n in [0, 2, 4] {
            assert_eq!(s.ranges[n], (big(2), big(3)));
        }
        let s = schedule_em_psi(&Psi::parse("n").unwrap(), 5, 1).unwrap();
        assert_eq!(s.ranges, vec![(big(2), big(5))]);
        assert!(s.pinned.is_empty());
        let s = schedule_em_psi(&Psi::parse("n").unwrap(), 2, 4).unwrap();
        assert_eq!(s.ranges[1], (big(8), big(8)));
        assert_eq!(s.ranges[3], (big(55), big(55)));
    }

    #[test]
    fn fmb_examples() {
        assert_eq!(sparse_positions(300), vec![1, 2, 9, 48, 300]);
        let s = schedule_fmb(&r(2, 1), 3, 10).unwrap();
        assert_eq!(s.ranges[1], (big(6), big(9)));
        assert_eq!(s.ranges[0], (big(4), big(5)));
        assert_eq!(s.ranges[8], (big(514), big(1025)));
        assert_eq!(s.ranges[2], (big(2), big(3)));
        assert!(schedule_fmb(&r(1, 1), 3, 10).is_err());
        // exact powers of a decimal base
        let s = schedule_fmb(&r(3, 2), 2, 48).unwrap();
        let f = (BigInt::from(3).pow(48) / BigInt::from(2).pow(48))
            .to_biguint()
            .unwrap();
        assert_eq!(s.ranges[47], (&f + 2u32, &f * 2u32 + 1u32));
    }

    #[test]
    fn centers_examples() {
        let s = schedule_from_centers("w", json!({}), &floors_from_values(&[1.0; 4]).unwrap(), 0)
            .unwrap();
        assert_eq!(s.params["M"], 2);
        assert!(s.ranges.iter().all(|r| *r == (big(4), big(7))));
        let floors = floors_from_ln(&[1.0, 0.5]).unwrap();
        assert_eq!(floors, vec![big(3), big(2)]);
        let s = schedule_from_centers("rn", json!({}), &floors, 0).unwrap();
        assert_eq!(s.ranges, vec![(big(6), big(11)), (big(4), big(7))]);
        assert!(floors_from_values(&[1.0, 0.0]).is_err());
        assert!(floors_from_ln(&[2e6]).is_err());
    }

    #[test]
    fn r_sequence_examples() {
        let psi = Psi::parse("n^2").unwrap();
        let rs = build_r_sequence(&psi, 1.0, 0.5, 6, 100).unwrap();
        let got = rs.log_r();
        for (g, w) in got.iter().zip([1.0, 0.5, 0.75, 1.125, 1.6875]) {
            assert!((g - w).abs() < 1e-12, "{got:?}");
        }
        assert!(rs.max_step_ratio <= 0.5 + 1e-9);
        let rs = build_r_sequence(&psi, 1.0, 1e6, 30, 100).unwrap();
        for (n, v) in rs.log_r().iter().enumerate() {
            assert!((v - ((n + 1) * (n + 1)) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn l_sequence_examples() {
        let psi = Psi::parse("exp(n)").unwrap();
        let ls = build_l_sequence(&psi, std::f64::consts::E, 0.1, 200, 400).unwrap();
        for (i, v) in ls.ln_log.iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-12);
        }
        assert!(!ls.horizon_sensitive);
        assert!(ls.min_excess >= 0.0 && ls.recursion_excess <= 1e-9);
        let ls = build_l_sequence(&Psi::parse("n^3").unwrap(), 1.0, 0.1, 50, 50).unwrap();
        assert!(ls.min_excess >= 0.0);
    }

    #[test]
    fn sampling_modes() {
        let s = DigitSchedule::constant(2, 3, 3).unwrap();
        let p = sample_point(&s, 3, SampleMode::Min, 0).unwrap();
        assert_eq!(p.digits.to_u64s().unwrap(), vec![2, 2, 2]);
        assert_eq!(p.x, r(7, 8));
        let q = sample_point(&s, 3, SampleMode::Max, 0).unwrap();
        assert!(p
            .digits
            .digits()
            .iter()
            .zip(q.digits.digits())
            .all(|(a, b)| a != b));
        let a = sample_point(&s, 3, SampleMode::SeededRandom, 42).unwrap();
        assert_eq!(
            a,
            sample_point(&s, 3, SampleMode::SeededRandom, 42).unwrap()
        );
        assert!(sample_point(&s, 4, SampleMode::Min, 0).is_err());
        let huge = schedule_fmb(&r(2, 1), 2, 48).unwrap();
        let p = sample_point(&huge, 48, SampleMode::SeededRandom, 1).unwrap();
        let (lo, hi) = &huge.ranges[47];
        assert!(&p.digits.digits()[47] >= lo && &p.digits.digits()[47] <= hi);
    }

    #[test]
    fn distortion_examples() {
        let psi = Psi::parse("log(n+1)").unwrap();
        let s = schedule_em_psi(&psi, 2, 4).unwrap();
        let rep = verify_distortion(&s, &r(1, 1), 4, DEFAULT_WORD_GUARD).unwrap();
        assert!(rep.exact);
        assert_eq!(rep.levels[0].min_ratio, 2.0);
        assert_eq!(rep.levels.len(), 4);
        let s = schedule_em_psi(&psi, 100, 10).unwrap();
        assert!(matches!(
            verify_distortion(&s, &r(1, 1), 10, DEFAULT_WORD_GUARD),
            Err(Error::Guard { .. })
        ));
    }

    #[test]
    fn distortion_matches_elimination() {
        let psi = Psi::parse("log(n+1)").unwrap();
        let s = schedule_em_psi(&psi, 3, 5).unwrap();
        let ranges = small_ranges(&s, 5).unwrap();
        let eps = 0.5;
        let rep = verify_distortion(&s, &r(1, 2), 5, DEFAULT_WORD_GUARD).unwrap();
        let mut mins = vec![f64::INFINITY; 5];
        for_each_prefix(&ranges, 5, &mut |n, word| {
            let seq = DigitSeq::from_u64s(word).unwrap();
            let star = eliminate(&seq, &starred_positions(n)).unwrap();
            let i = cylinder(&seq).unwrap();
            let i_star = cylinder(&star).unwrap();
            let ratio = (1.0 + eps) * ln_biguint(&i_star.q) / ln_biguint(&i.q);
            mins[n - 1] = mins[n - 1].min(ratio);
        });
        for (lvl, m) in rep.levels.iter().zip(mins) {
            assert!((lvl.min_ratio - m).abs() < 1e-15);
        }
    }

    #[test]
    fn gap_examples() {
        let psi = Psi::parse("log(n+1)").unwrap();
        for m in 2..=4 {
            let s = schedule_em_psi(&psi, m, 5).unwrap();
            let rep = verify_gap(&s, m, 3, DEFAULT_WORD_GUARD, DEFAULT_PAIR_GUARD).unwrap();
            assert!(rep.pass, "M = {m}: {rep:?}");
        }
        let s = DigitSchedule::constant(2, 2, 4).unwrap();
        let rep = verify_gap(&s, 2, 3, DEFAULT_WORD_GUARD, DEFAULT_PAIR_GUARD).unwrap();
        assert_eq!(rep.pairs, 0);
        assert!(rep.pass && rep.min_ratio.is_none());
        assert!(verify_gap(&s, 2, 4, DEFAULT_WORD_GUARD, DEFAULT_PAIR_GUARD).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn constructors_are_admissible(m in 2u64..40, depth in 1usize..40, bn in 11i64..40, c in 0.01f64..50.0) {
            let psi = Psi::parse(&format!("{c}*log(n+1)")).unwrap();
            let em = schedule_em_psi(&psi, m, depth.min(20)).unwrap();
            prop_assert_eq!(em.pinned.len() as u32, t_of(depth.min(20) as u64));
            let f = schedule_fmb(&r(bn, 10), m, depth).unwrap();
            let w = schedule_from_centers("w", json!({}), &floors_from_values(&vec![c; depth]).unwrap(), 0).unwrap();
            for s in [&em, &f, &w] {
                prop_assert!(s.ranges.iter().all(|(lo, hi)| *lo >= big(2) && lo <= hi));
            }
            for (lo, hi) in &w.ranges {
                prop_assert!(hi - lo + 1u32 >= big(4));
            }
        }

        #[test]
        fn sparse_positions_meet_the_inequality(depth in 1usize..100_000) {
            let p = sparse_positions(depth);
            for k in 1..p.len() {
                let sum: usize = p[..k].iter().sum();
                prop_assert_eq!(sum * (k + 1), p[k]);
            }
        }

        #[test]
        fn r_sequence_respects_both_bounds(a in 1.0f64..3.0, eps in 0.01f64..2.0, c in 0.5f64..3.0) {
            let psi = Psi::parse(&format!("n^{c}")).unwrap();
            let rs = build_r_sequence(&psi, a, eps, 60, 120).unwrap();
            let (theta, _) = crate::psi::theta_ln_table(&psi, 120).unwrap();
            let ln_step = (a - 1.0 + eps).ln();
            let mut prefix = LogSum::new();
            for (n, &v) in rs.ln_log.iter().enumerate() {
                prop_assert!(v <= theta[n]);
                if n > 0 {
                    prop_assert!(v <= ln_step + prefix.ln());
                }
                prefix.add_ln(v);
            }
            prop_assert!(rs.max_step_ratio <= a - 1.0 + eps + 1e-9);
        }

        #[test]
        fn l_sequence_dominates_psi(v in 1.0f64..4.0, eps in 0.01f64..1.0, c in 0.5f64..2.0) {
            let psi = Psi::parse(&format!("exp({c}*n)")).unwrap();
            let ls = build_l_sequence(&psi, v, eps, 80, 160).unwrap();
            for (n, &l) in ls.ln_log.iter().enumerate() {
                prop_assert!(l >= psi.ln(n as u64 + 1).unwrap());
            }
            prop_assert!(ls.recursion_excess <= 1e-9);
        }

        #[test]
        fn centered_points_track_psi(seed in 0u64..1000, m in 1u64..6) {
            let psi = Psi::parse("n").unwrap();
            let depth = 30;
            let s = schedule_from_centers("w", json!({}), &floors_from_psi(&psi, depth).unwrap(), m).unwrap();
            let p = sample_point(&s, depth, SampleMode::SeededRandom, seed).unwrap();
            for (i, d) in p.digits.digits().iter().enumerate() {
                let n = (i + 1) as f64;
                let ratio = ln_biguint(d) / n;
                let delta = (4.0 * m as f64).ln() / n;
                prop_assert!(ratio >= 1.0 - delta - 1e-12 && ratio <= 1.0 + delta + 1e-12);
            }
        }
    }
}
