//! Exact Lüroth expansion engine.
//!
//! The Lüroth map `T(x) = d(d-1)(x - 1/d)` with `d = ⌊1/x⌋ + 1` acts on
//! `(0, 1]`. Every operation here is carried out on exact rationals; there is
//! no floating-point path.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = num_rational::BigRational;

/// A finite sequence of Lüroth digits, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DigitSeq(#[serde(with = "crate::serde_ext::big_vec")] Vec<BigUint>);

impl DigitSeq {
    /// Builds a sequence after checking admissibility.
    pub fn new(digits: Vec<BigUint>) -> Result<Self> {
        check_admissible(&digits)?;
        Ok(DigitSeq(digits))
    }

    pub fn from_u64s(digits: &[u64]) -> Result<Self> {
        Self::new(digits.iter().map(|&d| BigUint::from(d)).collect())
    }

    pub fn empty() -> Self {
        DigitSeq(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn digits(&self) -> &[BigUint] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<BigUint> {
        self.0
    }

    /// The first `n` digits (or all of them if shorter).
    pub fn prefix(&self, n: usize) -> DigitSeq {
        DigitSeq(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Digits as `u64` where they fit, for display and tests.
    pub fn to_u64s(&self) -> Option<Vec<u64>> {
        self.0.iter().map(|d| u64::try_from(d).ok()).collect()
    }

    /// `Q_n = Π d_k (d_k - 1)`, the reciprocal of the cylinder length.
    pub fn q_product(&self) -> BigUint {
        self.0
            .iter()
            .fold(BigUint::one(), |acc, d| acc * d * (d - 1u32))
    }
}

impl fmt::Display for DigitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

fn check_admissible(digits: &[BigUint]) -> Result<()> {
    let two = BigUint::from(2u32);
    match digits.iter().position(|d| *d < two) {
        Some(i) => Err(Error::Admissibility {
            position: i + 1,
            digit: digits[i].to_string(),
        }),
        None => Ok(()),
    }
}

fn check_point(x: &Rational) -> Result<()> {
    if !x.is_positive() || *x > Rational::one() {
        return Err(Error::Domain(format!("point {x} is outside (0, 1]")));
    }
    Ok(())
}

/// One application of the Lüroth map: returns `(d_1(x), T(x))`.
pub fn luroth_step(x: &Rational) -> Result<(BigUint, Rational)> {
    check_point(x)?;
    let p = x.numer().magnitude();
    let q = x.denom().magnitude();
    let d: BigUint = q / p + 1u32;
    // T(p/q) = (d - 1)(p d - q) / q
    let num = (&d - 1u32) * (p * &d - q);
    let next = Rational::new(BigInt::from(num), BigInt::from(q.clone()));
    Ok((d, next))
}

/// The first `n` Lüroth digits of `x`.
pub fn digits(x: &Rational, n: usize) -> Result<DigitSeq> {
    check_point(x)?;
    let mut out = Vec::with_capacity(n);
    let mut cur = x.clone();
    for _ in 0..n {
        let (d, next) = luroth_step(&cur)?;
        out.push(d);
        cur = next;
    }
    Ok(DigitSeq(out))
}

/// Exact partial sum `Σ_k (Π_{i<k} 1/(d_i(d_i-1))) / d_k`, i.e. the n-th
/// convergent and the left endpoint of the cylinder.
pub fn value_of(seq: &DigitSeq) -> Result<Rational> {
    check_admissible(&seq.0)?;
    let mut it = seq.0.iter();
    let Some(first) = it.next() else {
        return Ok(Rational::zero());
    };
    // S_k = N_k / (Q_{k-1} d_k), N_{k+1} = N_k (d_k - 1) d_{k+1} + 1
    let mut num = BigUint::one();
    let mut q_prev = BigUint::one();
    let mut d_prev = first.clone();
    for d in it {
        num = num * (&d_prev - 1u32) * d + 1u32;
        q_prev = q_prev * &d_prev * (&d_prev - 1u32);
        d_prev = d.clone();
    }
    let den = q_prev * d_prev;
    Ok(Rational::new(BigInt::from(num), BigInt::from(den)))
}

/// An n-th order cylinder `I(d_1, …, d_n)`, taken half-open as `(left, right]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cylinder {
    pub digits: DigitSeq,
    pub left: Rational,
    pub right: Rational,
    pub length: Rational,
    /// `Q_n`, so that `length = 1 / q`.
    pub q: BigUint,
}

impl Cylinder {
    pub fn contains(&self, x: &Rational) -> bool {
        *x > self.left && *x <= self.right
    }
}

pub fn cylinder(seq: &DigitSeq) -> Result<Cylinder> {
    let left = value_of(seq)?;
    let q = seq.q_product();
    let length = Rational::new(BigInt::one(), BigInt::from(q.clone()));
    let right = &left + &length;
    Ok(Cylinder {
        digits: seq.clone(),
        left,
        right,
        length,
        q,
    })
}

/// Preperiod and period of the (eventually periodic) digit stream of a rational.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Periodicity {
    pub preperiod: DigitSeq,
    pub period: DigitSeq,
}

impl Periodicity {
    /// The first `n` digits of the stream `preperiod · period^∞`.
    pub fn expand(&self, n: usize) -> DigitSeq {
        let pre = self.preperiod.digits();
        let per = self.period.digits();
        let out = (0..n)
            .map(|i| {
                if i < pre.len() {
                    pre[i].clone()
                } else {
                    per[(i - pre.len()) % per.len()].clone()
                }
            })
            .collect();
        DigitSeq(out)
    }
}

/// Detects the shortest preperiod/period pair by exact orbit repetition.
///
/// The orbit of `p/q` stays among fractions with denominator dividing `q`, so
/// at most `q` steps are needed.
pub fn periodicity(x: &Rational) -> Result<Periodicity> {
    check_point(x)?;
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    let mut digits_out = Vec::new();
    let mut cur = x.clone();
    loop {
        if let Some(&start) = seen.get(&cur) {
            let period = digits_out.split_off(start);
            return Ok(Periodicity {
                preperiod: DigitSeq(digits_out),
                period: DigitSeq(period),
            });
        }
        seen.insert(cur.clone(), digits_out.len());
        let (d, next) = luroth_step(&cur)?;
        digits_out.push(d);
        cur = next;
    }
}

/// Removes the digits at the given 1-based positions, keeping order.
pub fn eliminate(seq: &DigitSeq, positions: &BTreeSet<usize>) -> Result<DigitSeq> {
    if let Some(&bad) = positions.iter().find(|&&p| p == 0 || p > seq.len()) {
        return Err(Error::Index {
            index: bad,
            len: seq.len(),
        });
    }
    let kept = seq
        .0
        .iter()
        .enumerate()
        .filter(|(i, _)| !positions.contains(&(i + 1)))
        .map(|(_, d)| d.clone())
        .collect();
    Ok(DigitSeq(kept))
}

/// Reduces `p/q` written as a string (`"2/5"`, `"1"`) to a rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Domain(format!("`{text}` is not a rational p/q")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Domain(format!("`{text}` is not a rational p/q")))?;
    if den.is_zero() {
        return Err(Error::Domain("zero denominator".into()));
    }
    Ok(Rational::new(num, den))
}

/// Exact index of the half-open grid cell `(iδ, (i+1)δ]` containing `x`, for
/// `δ = 2^{-j}`.
pub fn dyadic_cell(x: &Rational, j: u32) -> BigInt {
    // ceil(x * 2^j) - 1
    let scaled = x.numer() << j as usize;
    let (q, r) = scaled.div_rem(x.denom());
    if r.is_zero() {
        q - 1
    } else {
        q
    }
}
