//! Empirical dimension estimates for digit schedules, and Monte Carlo checks
//! of the digit law under Lebesgue measure.

use std::collections::{HashMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{dyadic_cell, DigitSeq, Rational};
use crate::numeric::{bisect_decreasing, ln_biguint, Bisection, CompensatedSum};
use crate::powersum::ln_range_sum;
use crate::psi::Psi;
use crate::rng::CounterRng;
use crate::serde_ext::ext_f64;
use crate::sets::DigitSchedule;

pub const MIN_BOX_POINTS: usize = 1000;
pub const SPREAD_WINDOW: usize = 10;
pub const CONVERGENT_INCREMENT: f64 = 1e-3;
pub const DIVERGENT_LEVEL: f64 = 3.0;
pub const DIVERGENT_DOUBLING_GROWTH: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Pressure,
    BoxCounting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Depth `n`, or `j` for the scale `δ = 2^{−j}`.
    pub index: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub count: Option<u64>,
    pub estimate: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateTrace {
    pub method: EstimateMethod,
    pub records: Vec<TraceRecord>,
    pub value: f64,
    pub uncertainty: f64,
    pub notes: Vec<String>,
}

impl EstimateTrace {
    /// `delta,count` rows for box-counting traces.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,count\n");
        for r in &self.records {
            if let (Some(d), Some(c)) = (r.delta, r.count) {
                out.push_str(&format!("{d:e},{c}\n"));
            }
        }
        out
    }
}

/// Per-depth root of `Σ_{i≤n} ln Σ_{d∈[lo_i,hi_i]} (d(d−1))^{−s} = 0` on `[0, 1]`.
pub fn pressure_dim(schedule: &DigitSchedule, depth: usize, tol: f64) -> Result<EstimateTrace> {
    if depth == 0 || depth > schedule.depth() {
        return Err(Error::Domain(format!(
            "depth must be in 1..={}, got {depth}",
            schedule.depth()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut groups: Vec<(&BigUint, &BigUint, f64)> = Vec::new();
    let mut index: HashMap<(&BigUint, &BigUint), usize> = HashMap::new();
    let mut records = Vec::with_capacity(depth);
    for (n, (lo, hi)) in schedule.ranges[..depth].iter().enumerate() {
        match index.get(&(lo, hi)) {
            Some(&g) => groups[g].2 += 1.0,
            None => {
                index.insert((lo, hi), groups.len());
                groups.push((lo, hi, 1.0));
            }
        }
        let pressure = |s: f64| -> f64 {
            groups
                .iter()
                .map(|(lo, hi, k)| k * ln_range_sum(lo, hi, s))
                .collect::<CompensatedSum>()
                .value()
        };
        // all widths 1: the left side is −s·ln Q_n
        let b = if pressure(0.0) <= 0.0 {
            Bisection {
                root: 0.0,
                residual: 0.0,
                iterations: 0,
                lo: 0.0,
                hi: 0.0,
            }
        } else {
            bisect_decreasing(pressure, 0.0, 1.0, tol)
        };
        records.push(TraceRecord {
            index: n as u64 + 1,
            delta: None,
            count: None,
            estimate: b.root,
            residual: b.residual,
        });
    }
    let window = &records[records.len().saturating_sub(SPREAD_WINDOW)..];
    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r.estimate), b.max(r.estimate))
        });
    let note = format!(
        "uncertainty is the spread over the last {} depths",
        window.len()
    );
    Ok(EstimateTrace {
        method: EstimateMethod::Pressure,
        value: records.last().expect("depth >= 1").estimate,
        uncertainty: hi - lo,
        records,
        notes: vec![note],
    })
}

/// Least-squares slope of `ln N(2^{−j})` against `j ln 2`. Cells are
/// `(iδ, (i+1)δ]`, assigned exactly.
pub fn box_dim(points: &[Rational], scales: &[u32]) -> Result<EstimateTrace> {
    if points.len() < MIN_BOX_POINTS {
        return Err(Error::Domain(format!(
            "box counting needs at least {MIN_BOX_POINTS} points, got {}",
            points.len()
        )));
    }
    if scales.len() < 2 || scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "need at least two scales 2^-j with j strictly increasing".into(),
        ));
    }
    let counts: Vec<u64> = scales
        .iter()
        .map(|&j| {
            points
                .iter()
                .map(|x| dyadic_cell(x, j))
                .collect::<HashSet<BigInt>>()
                .len() as u64
        })
        .collect();
    let mut notes = vec![];
    if counts[0] == 1 {
        let first = &points[0];
        if points.iter().any(|p| p != first) {
            return Err(Error::Domain(format!(
                "degenerate scale: all points share one cell at delta = 2^-{}",
                scales[0]
            )));
        }
        notes.push("all points coincide".to_string());
    }
    let xs: Vec<f64> = scales
        .iter()
        .map(|&j| j as f64 * std::f64::consts::LN_2)
        .collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let records: Vec<TraceRecord> = scales
        .iter()
        .zip(&counts)
        .zip(xs.iter().zip(&ys))
        .map(|((&j, &c), (x, y))| TraceRecord {
            index: j as u64,
            delta: Some((-(j as f64)).exp2()),
            count: Some(c),
            estimate: y / x,
            residual: y - (intercept + slope * x),
        })
        .collect();
    let rms = (records.iter().map(|r| r.residual * r.residual).sum::<f64>() / k).sqrt();
    notes.push(format!("{} points", points.len()));
    Ok(EstimateTrace {
        method: EstimateMethod::BoxCounting,
        records,
        value: slope,
        uncertainty: rms / sxx.sqrt(),
        notes,
    })
}

/// `⌊1/u⌋ + 1`, the first Lüroth digit of `u`; exact for every binary64 `u`.
pub fn sample_digit(u: f64) -> Result<BigUint> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("u must lie in (0, 1), got {u}")));
    }
    let x = Rational::from_float(u).expect("finite");
    Ok(sample_digit_exact(&x))
}

/// `⌊1/u⌋ + 1` for a rational `u ∈ (0, 1)`.
pub fn sample_digit_exact(u: &Rational) -> BigUint {
    let d: BigInt = u.recip().floor().to_integer() + 1;
    d.to_biguint().expect("positive")
}

/// The digit of `to_open_unit(w) = (2m+1)·2⁻⁵³` with `m = w >> 12`.
pub fn digit_from_word(w: u64) -> u64 {
    (1u64 << 53) / (2 * (w >> 12) + 1) + 1
}

fn partitioned_counts<F>(samples: u64, workers: usize, len: usize, f: F) -> Vec<u64>
where
    F: Fn(u64, &mut [u64]) + Sync,
{
    let workers = workers.clamp(1, samples.max(1) as usize);
    let chunk = samples.div_ceil(workers as u64);
    let tallies: Vec<Vec<u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let f = &f;
                scope.spawn(move || {
                    let mut local = vec![0u64; len];
                    for s in w * chunk..((w + 1) * chunk).min(samples) {
                        f(s, &mut local);
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut total = vec![0u64; len];
    for t in tallies {
        for (a, b) in total.iter_mut().zip(t) {
            *a += b;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BbVerdict {
    ConvergentType,
    DivergentType,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbLevel {
    pub n: u64,
    #[serde(with = "ext_f64")]
    pub phi: f64,
    /// `1/(⌈φ(n)⌉ − 1)`.
    pub probability: f64,
    pub events: u64,
    pub frequency: f64,
    pub sigma: f64,
    pub within_3sigma: bool,
    /// `φ(n) < 2`: the event is certain and is left out of all totals.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbReport {
    pub phi: String,
    pub samples: u64,
    pub depth: u64,
    pub seed: u64,
    pub levels: Vec<BbLevel>,
    pub mean_count: f64,
    pub expected_count: f64,
    pub sigma_mean: f64,
    pub mean_within_3sigma: bool,
    /// Fraction of unflagged levels whose frequency is within 3σ.
    pub coverage: f64,
    pub partial_sum_half: f64,
    pub last_quarter_increment: f64,
    pub verdict: BbVerdict,
    pub verdict_note: String,
}

/// Threshold digit `⌈φ⌉` (as a float) and `P(d ≥ φ)`.
fn event_threshold(phi: &Psi, n: u64) -> Result<(f64, f64, f64)> {
    match phi.value(n) {
        Ok(v) => {
            let c = v.ceil();
            Ok((v, c, if c >= 2.0 { 1.0 / (c - 1.0) } else { 1.0 }))
        }
        Err(Error::Overflow { .. }) => {
            let ln = phi.ln(n)?;
            Ok((f64::INFINITY, f64::INFINITY, (-ln).exp()))
        }
        Err(e) => Err(e),
    }
}

/// `S` samples of `N` i.i.d. Lüroth digits each; counts the events
/// `d_n ≥ φ(n)` and compares with the exact law `P(d ≥ k) = 1/(k−1)`.
pub fn bb_simulate(
    phi: &Psi,
    samples: u64,
    depth: u64,
    seed: u64,
    workers: usize,
) -> Result<BbReport> {
    if samples == 0 || depth == 0 {
        return Err(Error::Domain("samples and depth must be positive".into()));
    }
    let thresholds: Vec<(f64, f64, f64)> = (1..=depth)
        .map(|n| event_threshold(phi, n))
        .collect::<Result<_>>()?;
    let rng = CounterRng::new(seed);
    let events = partitioned_counts(samples, workers, depth as usize, |s, tally| {
        for (i, &(_, c, _)) in thresholds.iter().enumerate() {
            let d = digit_from_word(rng.word_at(s, i as u64 + 1));
            if d as f64 >= c {
                tally[i] += 1;
            }
        }
    });
    let sf = samples as f64;
    let mut levels = Vec::with_capacity(depth as usize);
    let mut expected = CompensatedSum::new();
    let mut variance = CompensatedSum::new();
    let mut total_events = 0u64;
    let mut partial = Vec::with_capacity(depth as usize);
    for (i, (&(v, _, p), &e)) in thresholds.iter().zip(&events).enumerate() {
        let flagged = v < 2.0;
        let frequency = e as f64 / sf;
        let sigma = (p * (1.0 - p) / sf).sqrt();
        if !flagged {
            expected.add(p);
            variance.add(p * (1.0 - p));
            total_events += e;
        }
        partial.push(expected.value());
        levels.push(BbLevel {
            n: i as u64 + 1,
            phi: v,
            probability: p,
            events: e,
            frequency,
            sigma,
            within_3sigma: (frequency - p).abs() <= 3.0 * sigma,
            flagged,
        });
    }
    let at = |n: u64| if n == 0 { 0.0 } else { partial[n as usize - 1] };
    let total = at(depth);
    let half = at(depth / 2);
    let last_quarter_increment = total - at(depth - depth / 4);
    let verdict = if last_quarter_increment < CONVERGENT_INCREMENT {
        BbVerdict::ConvergentType
    } else if total > DIVERGENT_LEVEL && total - half > DIVERGENT_DOUBLING_GROWTH {
        BbVerdict::DivergentType
    } else {
        BbVerdict::Inconclusive
    };
    let unflagged: Vec<&BbLevel> = levels.iter().filter(|l| !l.flagged).collect();
    let coverage = if unflagged.is_empty() {
        1.0
    } else {
        unflagged.iter().filter(|l| l.within_3sigma).count() as f64 / unflagged.len() as f64
    };
    let mean_count = total_events as f64 / sf;
    let sigma_mean = (variance.value() / sf).sqrt();
    Ok(BbReport {
        phi: phi.to_string(),
        samples,
        depth,
        seed,
        mean_within_3sigma: (mean_count - total).abs() <= 3.0 * sigma_mean,
        levels,
        mean_count,
        expected_count: total,
        sigma_mean,
        coverage,
        partial_sum_half: half,
        last_quarter_increment,
        verdict,
        verdict_note: format!(
            "heuristic: convergent-type if the last-quarter increment of the partial series is below {CONVERGENT_INCREMENT}, \
             divergent-type if the partial series exceeds {DIVERGENT_LEVEL} and grew by more than {DIVERGENT_DOUBLING_GROWTH} since N/2"
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitLawRow {
    /// The digit `k`, or `kmax + 1` for the tail row `d > kmax`.
    pub k: u64,
    pub tail: bool,
    pub probability: f64,
    pub frequency: f64,
    pub sigma: f64,
    pub within_3sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitLawReport {
    pub samples: u64,
    pub depth: u64,
    pub seed: u64,
    pub draws: u64,
    pub rows: Vec<DigitLawRow>,
    pub pass: bool,
}

/// Frequencies of the digits `2..=kmax` and of `d > kmax` over `S·N` draws,
/// against `1/(k(k−1))` and `1/kmax`.
pub fn digit_law_test(
    samples: u64,
    depth: u64,
    kmax: u64,
    seed: u64,
    workers: usize,
) -> Result<DigitLawReport> {
    if samples == 0 || depth == 0 || kmax < 2 {
        return Err(Error::Domain(
            "need samples >= 1, depth >= 1 and kmax >= 2".into(),
        ));
    }
    let rng = CounterRng::new(seed);
    let bins = kmax as usize;
    let counts = partitioned_counts(samples, workers, bins, |s, tally| {
        for n in 1..=depth {
            let d = digit_from_word(rng.word_at(s, n));
            tally[(d.min(kmax + 1) - 2) as usize] += 1;
        }
    });
    let draws = samples * depth;
    let df = draws as f64;
    let rows: Vec<DigitLawRow> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let k = i as u64 + 2;
            let tail = k > kmax;
            let p = if tail {
                1.0 / kmax as f64
            } else {
                1.0 / (k * (k - 1)) as f64
            };
            let frequency = c as f64 / df;
            let sigma = (p * (1.0 - p) / df).sqrt();
            DigitLawRow {
                k,
                tail,
                probability: p,
                frequency,
                sigma,
                within_3sigma: (frequency - p).abs() <= 3.0 * sigma,
            }
        })
        .collect();
    Ok(DigitLawReport {
        samples,
        depth,
        seed,
        draws,
        pass: rows.iter().all(|r| r.within_3sigma),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipEntry {
    pub n: u64,
    /// `log d_n / ψ(n)`.
    pub ratio: f64,
    /// Sup and inf of the ratio over positions `n..=len`.
    pub tail_sup: f64,
    pub tail_inf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub psi: String,
    pub length: usize,
    pub entries: Vec<MembershipEntry>,
    pub note: String,
}

/// `log d_n / ψ(n)` at the checkpoints, with suffix sup and inf over the
/// available digits. A finite-horizon view only.
pub fn membership_diagnostic(
    digits: &DigitSeq,
    psi: &Psi,
    checkpoints: &[u64],
) -> Result<MembershipReport> {
    let len = digits.len();
    if let Some(&bad) = checkpoints.iter().find(|&&n| n == 0 || n as usize > len) {
        return Err(Error::Index {
            index: bad as usize,
            len,
        });
    }
    let ratios: Vec<f64> = digits
        .digits()
        .iter()
        .enumerate()
        .map(|(i, d)| Ok((ln_biguint(d).ln() - psi.ln(i as u64 + 1)?).exp()))
        .collect::<Result<_>>()?;
    let mut sup = vec![f64::NEG_INFINITY; len + 1];
    let mut inf = vec![f64::INFINITY; len + 1];
    for i in (0..len).rev() {
        sup[i] = sup[i + 1].max(ratios[i]);
        inf[i] = inf[i + 1].min(ratios[i]);
    }
    Ok(MembershipReport {
        psi: psi.to_string(),
        length: len,
        entries: checkpoints
            .iter()
            .map(|&n| {
                let i = n as usize - 1;
                MembershipEntry {
                    n,
                    ratio: ratios[i],
                    tail_sup: sup[i],
                    tail_inf: inf[i],
                }
            })
            .collect(),
        note: "finite-horizon diagnostic; limits are not certified".into(),
    })
}

/// Left endpoints of every depth-`depth` cylinder of the schedule.
pub fn cylinder_points(
    schedule: &DigitSchedule,
    depth: usize,
    guard: u64,
) -> Result<Vec<Rational>> {
    if depth > schedule.depth() {
        return Err(Error::Domain(format!(
            "depth {depth} exceeds the schedule depth {}",
            schedule.depth()
        )));
    }
    let count = schedule.word_count(depth);
    if count > guard {
        return Err(Error::Guard {
            requested: format!("{count} cylinders"),
            guard,
        });
    }
    // left endpoint = Σ_k (−1)^{k+1}... expands level by level:
    // x = 1/d_1 + (1/(d_1(d_1−1)))·x', so left(w) = 1/d_1 + left(w')/(d_1(d_1−1))
    // with the empty word at 0.
    let mut points = vec![Rational::zero()];
    for (lo, hi) in schedule.ranges[..depth].iter().rev() {
        let mut next = Vec::with_capacity(points.len() * (hi - lo + 1u32).to_usize().unwrap_or(1));
        let mut d = lo.clone();
        while d <= *hi {
            let di = BigInt::from(d.clone());
            let inv = Rational::new(BigInt::one(), di.clone());
            let scale = Rational::new(BigInt::one(), &di * (&di - 1));
            next.extend(points.iter().map(|p| &inv + p * &scale));
            d += 1u32;
        }
        points = next;
    }
    Ok(points)
}
