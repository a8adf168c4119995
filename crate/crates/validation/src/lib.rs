//! Reference computations for the acceptance suite, written without the
//! library's own summation and root-finding code so the two can be compared.

/// Neumaier-compensated sum.
pub fn neumaier<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `Σ_{d=lo}^{hi} (d(d−1))^{−s}`, summed smallest terms first.
pub fn pair_sum(lo: u64, hi: u64, s: f64) -> f64 {
    neumaier((lo..=hi).rev().map(|d| ((d as f64) * (d as f64 - 1.0)).powf(-s)))
}

const DIRECT: u64 = 20_000;

/// `ζ(σ, a) = Σ_{k≥0} (k+a)^{−σ}` for large `a`, by Euler–Maclaurin.
fn hurwitz_large(sigma: f64, a: f64) -> f64 {
    let p = a.powf(-sigma);
    a.powf(1.0 - sigma) / (sigma - 1.0) + p / 2.0 + sigma * p / (12.0 * a)
        - sigma * (sigma + 1.0) * (sigma + 2.0) * p / (720.0 * a.powi(3))
        + sigma * (sigma + 1.0) * (sigma + 2.0) * (sigma + 3.0) * (sigma + 4.0) * p
            / (30240.0 * a.powi(5))
}

/// `Σ_{d≥2} (d(d−1))^{−s}` for `s > 1/2`. Past `DIRECT` the terms are
/// `(d−½)^{−2s}(1 − (2d−1)^{−2})^{−s}`, expanded to second order.
pub fn full_sum(s: f64) -> f64 {
    assert!(s > 0.5, "series diverges for s <= 1/2");
    let a = DIRECT as f64 + 0.5;
    let sigma = 2.0 * s;
    let tail = hurwitz_large(sigma, a)
        + s / 4.0 * hurwitz_large(sigma + 2.0, a)
        + s * (s + 1.0) / 32.0 * hurwitz_large(sigma + 4.0, a);
    neumaier([pair_sum(2, DIRECT, s), tail])
}

/// `B^{−s} Σ_{d≥2} (d(d−1))^{−s} − 1`, a decreasing function of `s`.
pub fn g_excess(ln_b: f64, s: f64) -> f64 {
    (-s * ln_b).exp() * full_sum(s) - 1.0
}

/// Plain bisection of a decreasing function to bracket width `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    assert!(f(lo) > 0.0 && f(hi) < 0.0, "no sign change on [{lo}, {hi}]");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of `Σ_{d≥2} (e^α d(d−1))^{−s} = 1`.
pub fn h_reference(alpha: f64) -> f64 {
    bisect(|s| g_excess(alpha, s), 0.5 + 1e-9, 1.0, 1e-15)
}

pub fn harmonic(n: u64) -> f64 {
    neumaier((1..=n).rev().map(|k| 1.0 / k as f64))
}

/// `ln Σ e^{x_i}`.
pub fn ln_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + neumaier(xs.iter().map(|x| (x - m).exp())).ln()
}
