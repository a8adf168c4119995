//! Logarithms of the power sums `Σ_{d=a}^{b} (d(d−1))^{−s}`.
//!
//! Short ranges are summed term by term. Long ranges switch to
//! Euler–Maclaurin above [`EM_START`], where `(x(x−1))^{−s}` is expanded as
//! `Σ_j c_j x^{−2s−j}` with `c_j = (s)_j / j!` and each power is integrated in
//! closed form. Bounds may be arbitrarily large integers; everything is
//! carried as logarithms.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::numeric::{ln_biguint, ln_sub_exp, CompensatedSum, LogSum};

/// Below this point terms are always summed directly.
pub const EM_START: u64 = 1 << 14;
/// Ranges at most this long are summed directly wherever they sit.
const DIRECT_WIDTH: u64 = 1 << 13;
const SERIES_TERMS: usize = 5;

/// `ln (d(d−1))^{−s}` for `d ≥ 2` given `ln d`.
fn ln_term_big(ln_d: f64, d_inv: f64, s: f64) -> f64 {
    -s * (2.0 * ln_d + (-d_inv).ln_1p())
}

fn ln_term(d: u64, s: f64) -> f64 {
    let df = d as f64;
    -s * (df.ln() + (df - 1.0).ln())
}

/// Direct sum in descending term order (smallest `d` first).
fn ln_direct(lo: &BigUint, count: u64, s: f64) -> f64 {
    if let Some(lo) = lo
        .to_u64()
        .filter(|&v| v.checked_add(count).is_some_and(|e| e < 1 << 53))
    {
        let shift = ln_term(lo, s);
        let acc: CompensatedSum = (lo..lo + count)
            .map(|d| (ln_term(d, s) - shift).exp())
            .collect();
        return shift + acc.value().ln();
    }
    let mut sum = LogSum::new();
    let mut d = lo.clone();
    for _ in 0..count {
        let ln_d = ln_biguint(&d);
        sum.add_ln(ln_term_big(ln_d, (-ln_d).exp(), s));
        d += 1u32;
    }
    sum.ln()
}

/// `ln((e^{tL} − 1)/t)`, the log of `∫_0^L e^{tu} du`.
fn ln_expm1_over(t: f64, l: f64) -> f64 {
    if t == 0.0 {
        return l.ln();
    }
    let tl = t * l;
    if tl > 700.0 {
        return tl + (-(-tl).exp_m1()).ln() - t.ln();
    }
    (tl.exp_m1() / t).ln()
}

/// Euler–Maclaurin estimate of `ln Σ_{d=a}^{b} (d(d−1))^{−s}` for
/// `a ≥ EM_START`; `b = None` means the infinite tail (requires `s > 1/2`).
fn ln_em(a: &BigUint, b: Option<&BigUint>, s: f64) -> f64 {
    let ln_a = ln_biguint(a);
    let a_inv = (-ln_a).exp();
    let ln_fa = ln_term_big(ln_a, a_inv, s);
    // |f'(x)| = f(x)·s·(1/x + 1/(x−1))
    let ln_dfa = ln_fa + s.ln() + (a_inv + a_inv / (1.0 - a_inv)).ln();

    let mut sum = LogSum::new();
    let mut coeff = 1.0;
    let span = b.map(|b| {
        let width = b - a;
        if width == BigUint::default() {
            0.0
        } else {
            (ln_biguint(&width) - ln_a).exp().ln_1p()
        }
    });
    for j in 0..SERIES_TERMS {
        if j > 0 {
            coeff *= (s + (j - 1) as f64) / j as f64;
        }
        if coeff == 0.0 {
            break;
        }
        let t = 1.0 - 2.0 * s - j as f64;
        let ln_int = match span {
            Some(l) if l == 0.0 => f64::NEG_INFINITY,
            Some(l) => t * ln_a + ln_expm1_over(t, l),
            None => t * ln_a - (-t).ln(),
        };
        sum.add_ln(coeff.ln() + ln_int);
    }
    sum.add_ln(ln_fa - std::f64::consts::LN_2);
    match b {
        Some(b) if b != a => {
            let ln_b = ln_biguint(b);
            let b_inv = (-ln_b).exp();
            let ln_fb = ln_term_big(ln_b, b_inv, s);
            let ln_dfb = ln_fb + s.ln() + (b_inv + b_inv / (1.0 - b_inv)).ln();
            sum.add_ln(ln_fb - std::f64::consts::LN_2);
            if s > 0.0 && ln_dfa > ln_dfb {
                sum.add_ln(ln_sub_exp(ln_dfa, ln_dfb) - 12f64.ln());
            }
        }
        Some(_) => {
            // a single term
            return ln_fa;
        }
        None => {
            if s > 0.0 {
                sum.add_ln(ln_dfa - 12f64.ln());
            }
        }
    }
    sum.ln()
}

/// `ln Σ_{d=lo}^{hi} (d(d−1))^{−s}` for `2 ≤ lo ≤ hi` and `s ≥ 0`.
pub fn ln_range_sum(lo: &BigUint, hi: &BigUint, s: f64) -> f64 {
    debug_assert!(lo <= hi && *lo >= BigUint::from(2u32));
    let width = hi - lo + BigUint::one();
    if let Some(w) = width.to_u64().filter(|&w| w <= DIRECT_WIDTH) {
        return ln_direct(lo, w, s);
    }
    let start = BigUint::from(EM_START);
    if *lo >= start {
        return ln_em(lo, Some(hi), s);
    }
    let head_count = EM_START - lo.to_u64().expect("below EM_START");
    let mut sum = LogSum::new();
    sum.add_ln(ln_direct(lo, head_count, s));
    sum.add_ln(ln_em(&start, Some(hi), s));
    sum.ln()
}

/// `ln Σ_{d≥lo} (d(d−1))^{−s}` for `s > 1/2`: a direct sum up to `k_direct`
/// followed by the Euler–Maclaurin tail.
pub fn ln_tail_sum(lo: u64, k_direct: u64, s: f64) -> f64 {
    let k = k_direct.max(EM_START - 1).max(lo);
    let mut sum = LogSum::new();
    sum.add_ln(ln_direct(&BigUint::from(lo), k + 1 - lo, s));
    sum.add_ln(ln_em(&BigUint::from(k + 1), None, s));
    sum.ln()
}

/// Plain integral bound `Σ_{d>K} (d(d−1))^{−s} ≤ (K−1)^{1−2s}/(2s−1)`.
pub fn tail_integral_bound(k: u64, s: f64) -> f64 {
    ((k - 1) as f64).powf(1.0 - 2.0 * s) / (2.0 * s - 1.0)
}
