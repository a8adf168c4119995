//! Floating-point helpers shared by the profile, solver and estimator code.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Neumaier (improved Kahan) compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of positive terms supplied by their natural logs.
///
/// The running total is stored as `e^shift · sum`, rescaled whenever a term
/// would overflow the current frame, so sums of values far beyond the
/// binary64 range stay accurate.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    shift: f64,
    acc: CompensatedSum,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum {
            shift: f64::NEG_INFINITY,
            acc: CompensatedSum::new(),
        }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_ln(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if self.shift == f64::NEG_INFINITY {
            self.shift = ln_term;
        } else if ln_term > self.shift + 500.0 {
            let scale = (self.shift - ln_term).exp();
            self.acc = CompensatedSum {
                sum: self.acc.sum * scale,
                comp: self.acc.comp * scale,
            };
            self.shift = ln_term;
        }
        self.acc.add((ln_term - self.shift).exp());
    }

    /// Natural log of the total; `-inf` when empty.
    pub fn ln(&self) -> f64 {
        if self.shift == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.shift + self.acc.value().ln()
    }
}

/// `ln(e^a - e^b)` for `a > b`.
pub fn ln_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// `ln(e^a + e^b)`.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Natural log of an arbitrary-precision unsigned integer (`-inf` for 0).
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Outcome of a bisection on a function that is strictly decreasing with a
/// sign change on the initial bracket.
#[derive(Debug, Clone, Copy)]
pub struct Bisection {
    pub root: f64,
    pub residual: f64,
    pub iterations: u32,
    pub lo: f64,
    pub hi: f64,
}

pub const MAX_BISECTION_STEPS: u32 = 200;

/// Bisects `f` on `[lo, hi]` where `f(lo) > 0 > f(hi)`, stopping when the
/// bracket is narrower than `tol` and `|f| <= tol`, when the bracket can no
/// longer be split, or after 200 steps. The root reported is the final
/// bracket end with the smaller residual.
pub fn bisect_decreasing<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Bisection {
    let mut iterations = 0;
    let (mut f_lo, mut f_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    while iterations < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let v = f(mid);
        if v == 0.0 {
            return Bisection {
                root: mid,
                residual: 0.0,
                iterations,
                lo: mid,
                hi: mid,
            };
        }
        if v > 0.0 {
            lo = mid;
            f_lo = v;
        } else {
            hi = mid;
            f_hi = v;
        }
        if hi - lo <= tol && f_lo.abs().min(f_hi.abs()) <= tol {
            break;
        }
    }
    let (root, residual) = if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo.abs())
    } else {
        (hi, f_hi.abs())
    };
    Bisection {
        root,
        residual,
        iterations,
        lo,
        hi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10_000 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-12)).abs() < 1e-24);
    }

    #[test]
    fn log_sum_handles_huge_terms() {
        let mut s = LogSum::new();
        for k in 1..=3 {
            s.add_ln(1000.0 * k as f64);
        }
        let expect = 3000.0 + (1.0 + (-1000.0f64).exp() + (-2000.0f64).exp()).ln();
        assert!((s.ln() - expect).abs() < 1e-12);

        let mut t = LogSum::new();
        for x in [1.0f64, 2.0, 3.0] {
            t.add_ln(x.ln());
        }
        assert!((t.ln() - 6.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn ln_big_matches_small() {
        let x = BigUint::from(123_456_789u64);
        assert!((ln_biguint(&x) - 123_456_789f64.ln()).abs() < 1e-14);
        let big = BigUint::from(3u32).pow(2000);
        assert!((ln_biguint(&big) / (2000.0 * 3f64.ln()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let b = bisect_decreasing(|x| 2.0 - x * x, 0.0, 2.0, 1e-14);
        assert!((b.root - 2f64.sqrt()).abs() < 1e-14);
        assert!(b.iterations <= MAX_BISECTION_STEPS);
    }
}
