//! Certified enclosures of ψ(n) and e^{ψ(n)} in arbitrary precision.
//!
//! Pinned digits such as `⌊e^{ψ(n)}⌋ + 1` must be exact integers. Values are
//! enclosed in intervals with dyadic rational endpoints, rounded outward to a
//! working number of significant bits; the floor is accepted only when both
//! endpoints agree, otherwise the precision is doubled.
//!
//! `exp` applied to a tree is first rewritten using `e^{log g} = g`,
//! `e^{a+b} = e^a e^b` and `e^{k log g} = g^k` (integer `k`), so that values
//! like `e^{log 5}` are exactly 5 rather than an interval straddling it.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::parse::{BinOp, Func, PsiExpr};
use crate::error::{Error, Result};
use crate::expansion::Rational;

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

#[derive(Debug)]
enum Fault {
    /// Bounds too wide to decide a sign; retry at higher precision.
    Imprecise,
    Domain(String),
}

type EncResult<T> = std::result::Result<T, Fault>;

impl Interval {
    pub fn point(x: Rational) -> Interval {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn exact_integer(&self) -> Option<BigInt> {
        (self.is_point() && self.lo.is_integer()).then(|| self.lo.to_integer())
    }

    fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }
}

fn mul_pow2(x: &Rational, k: i64) -> Rational {
    if k >= 0 {
        Rational::new(x.numer() << k as usize, x.denom().clone())
    } else {
        Rational::new(x.numer().clone(), x.denom() << (-k) as usize)
    }
}

/// Rounds `x` down (toward −∞) to about `prec` significant bits.
fn round_down(x: &Rational, prec: u64) -> Rational {
    if x.is_zero() {
        return x.clone();
    }
    if x.is_negative() {
        return -round_up(&-x, prec);
    }
    let e = x.numer().bits() as i64 - x.denom().bits() as i64;
    let k = prec as i64 - e;
    let scaled = mul_pow2(x, k);
    if scaled.is_integer() {
        return x.clone();
    }
    mul_pow2(&Rational::from_integer(scaled.floor().to_integer()), -k)
}

fn round_up(x: &Rational, prec: u64) -> Rational {
    if x.is_zero() {
        return x.clone();
    }
    if x.is_negative() {
        return -round_down(&-x, prec);
    }
    let e = x.numer().bits() as i64 - x.denom().bits() as i64;
    let k = prec as i64 - e;
    let scaled = mul_pow2(x, k);
    if scaled.is_integer() {
        return x.clone();
    }
    mul_pow2(&Rational::from_integer(scaled.ceil().to_integer()), -k)
}

struct Ctx {
    prec: u64,
}

impl Ctx {
    fn widen(&self, lo: Rational, hi: Rational) -> Interval {
        Interval {
            lo: round_down(&lo, self.prec),
            hi: round_up(&hi, self.prec),
        }
    }

    fn add(&self, a: &Interval, b: &Interval) -> Interval {
        self.widen(&a.lo + &b.lo, &a.hi + &b.hi)
    }

    fn sub(&self, a: &Interval, b: &Interval) -> Interval {
        self.widen(&a.lo - &b.hi, &a.hi - &b.lo)
    }

    fn neg(&self, a: &Interval) -> Interval {
        Interval {
            lo: -a.hi.clone(),
            hi: -a.lo.clone(),
        }
    }

    fn mul(&self, a: &Interval, b: &Interval) -> Interval {
        let p = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let lo = p.iter().min().expect("nonempty").clone();
        let hi = p.iter().max().expect("nonempty").clone();
        self.widen(lo, hi)
    }

    fn recip(&self, a: &Interval) -> EncResult<Interval> {
        if a.contains_zero() {
            return if a.is_point() {
                Err(Fault::Domain("division by zero".into()))
            } else {
                Err(Fault::Imprecise)
            };
        }
        Ok(self.widen(a.hi.recip(), a.lo.recip()))
    }

    fn div(&self, a: &Interval, b: &Interval) -> EncResult<Interval> {
        Ok(self.mul(a, &self.recip(b)?))
    }

    fn powi(&self, a: &Interval, k: &BigInt) -> EncResult<Interval> {
        if k.is_negative() {
            let pos = self.powi(a, &-k)?;
            return self.recip(&pos);
        }
        if k.is_zero() {
            return Ok(Interval::point(Rational::one()));
        }
        let mut result = Interval::point(Rational::one());
        let mut base = a.clone();
        let bits = k.magnitude().bits();
        for i in 0..bits {
            if k.magnitude().bit(i) {
                result = self.mul(&result, &base);
            }
            if i + 1 < bits {
                base = self.sqr(&base);
            }
        }
        Ok(result)
    }

    fn sqr(&self, a: &Interval) -> Interval {
        if a.contains_zero() {
            let m = if a.lo.abs() > a.hi.abs() {
                a.lo.abs()
            } else {
                a.hi.abs()
            };
            return self.widen(Rational::zero(), &m * &m);
        }
        self.mul(a, a)
    }

    fn exp(&self, a: &Interval) -> Interval {
        let (lo, _) = exp_bounds(&a.lo, self.prec);
        let (_, hi) = exp_bounds(&a.hi, self.prec);
        self.widen(lo, hi)
    }

    fn ln(&self, a: &Interval) -> EncResult<Interval> {
        if !a.lo.is_positive() {
            return if a.hi.is_positive() {
                Err(Fault::Imprecise)
            } else {
                Err(Fault::Domain("log of a nonpositive value".into()))
            };
        }
        let (lo, _) = ln_bounds(&a.lo, self.prec);
        let (_, hi) = ln_bounds(&a.hi, self.prec);
        Ok(self.widen(lo, hi))
    }

    fn sqrt(&self, a: &Interval) -> EncResult<Interval> {
        if a.lo.is_negative() {
            return if a.hi.is_negative() {
                Err(Fault::Domain("sqrt of a negative value".into()))
            } else {
                Err(Fault::Imprecise)
            };
        }
        let (lo, _) = sqrt_bounds(&a.lo, self.prec);
        let (_, hi) = sqrt_bounds(&a.hi, self.prec);
        Ok(self.widen(lo, hi))
    }
}

/// Fixed-point lower and upper bounds on `e^f · 2^w` for `f ∈ [0, 1]`.
fn exp_fixed(f: &Rational, w: u64) -> (BigInt, BigInt) {
    let one = BigInt::one() << w as usize;
    let scaled = mul_pow2(f, w as i64);
    let f_lo = scaled.floor().to_integer();
    let f_hi = scaled.ceil().to_integer();

    let mut sum_lo = one.clone();
    let mut term = one.clone();
    let mut j = 1u64;
    while !term.is_zero() {
        term = (&term * &f_lo).div_floor(&(&one * j));
        sum_lo += &term;
        j += 1;
    }

    let mut sum_hi = one.clone();
    let mut term = one.clone();
    let mut j = 1u64;
    loop {
        term = (&term * &f_hi).div_ceil(&(&one * j));
        sum_hi += &term;
        j += 1;
        // remaining terms shrink by at least 1/2 per step once j >= 2
        if term <= BigInt::one() && j >= 3 {
            sum_hi += 2 * &term + 2;
            break;
        }
    }
    (sum_lo, sum_hi)
}

/// Rational bounds `lo ≤ e^x ≤ hi` with about `prec` significant bits.
fn exp_bounds(x: &Rational, prec: u64) -> (Rational, Rational) {
    let w = prec + 32;
    let q = x.floor().to_integer();
    let f = x - Rational::from_integer(q.clone());
    let denom = BigInt::one() << w as usize;
    let (flo, fhi) = exp_fixed(&f, w);
    let ef = Interval {
        lo: Rational::new(flo, denom.clone()),
        hi: Rational::new(fhi, denom.clone()),
    };
    let ctx = Ctx { prec: w };
    if q.is_zero() {
        return (round_down(&ef.lo, prec), round_up(&ef.hi, prec));
    }
    let (elo, ehi) = exp_fixed(&Rational::one(), w);
    let e = Interval {
        lo: Rational::new(elo, denom.clone()),
        hi: Rational::new(ehi, denom),
    };
    let eq = ctx.powi(&e, &q).expect("e is positive");
    let r = ctx.mul(&eq, &ef);
    (round_down(&r.lo, prec), round_up(&r.hi, prec))
}

/// Fixed-point bounds on `atanh(z) · 2^w` for `z ∈ [0, 1/3]`.
fn atanh_fixed(z: &Rational, w: u64) -> (BigInt, BigInt) {
    let one = BigInt::one() << w as usize;
    let scaled = mul_pow2(z, w as i64);
    let z_lo = scaled.floor().to_integer();
    let z_hi = scaled.ceil().to_integer();

    let z2_lo = (&z_lo * &z_lo).div_floor(&one);
    let mut pow = z_lo.clone();
    let mut sum_lo = BigInt::zero();
    let mut j = 0u64;
    while !pow.is_zero() {
        sum_lo += pow.div_floor(&BigInt::from(2 * j + 1));
        pow = (&pow * &z2_lo).div_floor(&one);
        j += 1;
    }

    let z2_hi = (&z_hi * &z_hi).div_ceil(&one);
    let mut pow = z_hi;
    let mut sum_hi = BigInt::zero();
    let mut j = 0u64;
    loop {
        sum_hi += pow.div_ceil(&BigInt::from(2 * j + 1));
        pow = (&pow * &z2_hi).div_ceil(&one);
        j += 1;
        if pow <= BigInt::one() {
            // tail ratio z^2 <= 1/9
            sum_hi += &pow + 2;
            break;
        }
    }
    (sum_lo, sum_hi)
}

fn ln2_bounds(w: u64) -> (Rational, Rational) {
    let denom = BigInt::one() << w as usize;
    let (lo, hi) = atanh_fixed(&Rational::new(1.into(), 3.into()), w);
    (
        Rational::new(2 * lo, denom.clone()),
        Rational::new(2 * hi, denom),
    )
}

/// Rational bounds on `ln x` for `x > 0`.
fn ln_bounds(x: &Rational, prec: u64) -> (Rational, Rational) {
    let w = prec + 32 + 64;
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut m = mul_pow2(x, -k);
    let two = Rational::from_integer(2.into());
    while m >= two {
        m = mul_pow2(&m, -1);
        k += 1;
    }
    while m < Rational::one() {
        m = mul_pow2(&m, 1);
        k -= 1;
    }
    let z = (&m - Rational::one()) / (&m + Rational::one());
    let denom = BigInt::one() << w as usize;
    let (alo, ahi) = atanh_fixed(&z, w);
    let lnm = Interval {
        lo: Rational::new(2 * alo, denom.clone()),
        hi: Rational::new(2 * ahi, denom),
    };
    let (l2lo, l2hi) = ln2_bounds(w);
    let kk = Rational::from_integer(k.into());
    let (klo, khi) = if k >= 0 {
        (&kk * l2lo, &kk * l2hi)
    } else {
        (&kk * l2hi, &kk * l2lo)
    };
    (
        round_down(&(klo + lnm.lo), prec),
        round_up(&(khi + lnm.hi), prec),
    )
}

fn sqrt_bounds(x: &Rational, prec: u64) -> (Rational, Rational) {
    if x.is_zero() {
        return (Rational::zero(), Rational::zero());
    }
    let e = x.numer().bits() as i64 - x.denom().bits() as i64;
    let s = prec as i64 + 8 - e.div_euclid(2);
    let y = mul_pow2(x, 2 * s);
    let ylo = y.floor().to_integer().to_biguint().unwrap_or_default();
    let yhi = y.ceil().to_integer().to_biguint().unwrap_or_default();
    let lo = BigInt::from(ylo.sqrt());
    let hi = BigInt::from(yhi.sqrt()) + 1;
    (
        mul_pow2(&Rational::from_integer(lo), -s),
        mul_pow2(&Rational::from_integer(hi), -s),
    )
}

/// Exact value of a decimal literal such as `0.5` or `1.5e3`.
pub fn decimal_to_rational(text: &str) -> Option<Rational> {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int}{frac}");
    let num: BigInt = if digits.is_empty() {
        return None;
    } else {
        digits.parse().ok()?
    };
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(num * ten.pow(scale as u32))
    } else {
        Rational::new(num, ten.pow((-scale) as u32))
    })
}

fn enclose(ctx: &Ctx, e: &PsiExpr, n: u64) -> EncResult<Interval> {
    Ok(match e {
        PsiExpr::Num(lit) => {
            let v = decimal_to_rational(&lit.text)
                .or_else(|| Rational::from_float(lit.value))
                .ok_or_else(|| Fault::Domain("bad literal".into()))?;
            Interval::point(v)
        }
        PsiExpr::N => Interval::point(Rational::from_integer(n.into())),
        PsiExpr::Neg(a) => ctx.neg(&enclose(ctx, a, n)?),
        PsiExpr::Bin(op, a, b) => {
            let x = enclose(ctx, a, n)?;
            let y = enclose(ctx, b, n)?;
            match op {
                BinOp::Add => ctx.add(&x, &y),
                BinOp::Sub => ctx.sub(&x, &y),
                BinOp::Mul => ctx.mul(&x, &y),
                BinOp::Div => ctx.div(&x, &y)?,
                BinOp::Pow => match y.exact_integer() {
                    Some(k) => ctx.powi(&x, &k)?,
                    None => {
                        let l = ctx.ln(&x)?;
                        ctx.exp(&ctx.mul(&y, &l))
                    }
                },
            }
        }
        PsiExpr::Call(func, a) => {
            let x = enclose(ctx, a, n)?;
            match func {
                Func::Log => ctx.ln(&x)?,
                Func::Log2 => {
                    let l = ctx.ln(&x)?;
                    let (lo, hi) = ln2_bounds(ctx.prec + 32);
                    ctx.div(&l, &Interval { lo, hi })?
                }
                Func::Exp => ctx.exp(&x),
                Func::Sqrt => ctx.sqrt(&x)?,
                Func::Floor => {
                    let lo = x.lo.floor();
                    let hi = x.hi.floor();
                    Interval { lo, hi }
                }
            }
        }
    })
}

fn exp_enclose(ctx: &Ctx, e: &PsiExpr, n: u64) -> EncResult<Interval> {
    match e {
        PsiExpr::Call(Func::Log, g) => {
            let v = enclose(ctx, g, n)?;
            if !v.lo.is_positive() {
                return Err(if v.hi.is_positive() {
                    Fault::Imprecise
                } else {
                    Fault::Domain("log of a nonpositive value".into())
                });
            }
            Ok(v)
        }
        PsiExpr::Bin(BinOp::Add, a, b) => {
            Ok(ctx.mul(&exp_enclose(ctx, a, n)?, &exp_enclose(ctx, b, n)?))
        }
        PsiExpr::Bin(BinOp::Sub, a, b) => {
            ctx.div(&exp_enclose(ctx, a, n)?, &exp_enclose(ctx, b, n)?)
        }
        PsiExpr::Neg(a) => ctx.recip(&exp_enclose(ctx, a, n)?),
        PsiExpr::Bin(BinOp::Mul, a, b) => {
            let log_side = |c: &PsiExpr, g: &PsiExpr| -> EncResult<Option<Interval>> {
                let PsiExpr::Call(Func::Log, g) = g else {
                    return Ok(None);
                };
                let k = enclose(ctx, c, n)?;
                match k.exact_integer() {
                    Some(k) => {
                        let base = enclose(ctx, g, n)?;
                        if !base.lo.is_positive() {
                            return Err(Fault::Imprecise);
                        }
                        Ok(Some(ctx.powi(&base, &k)?))
                    }
                    None => Ok(None),
                }
            };
            if let Some(v) = log_side(a, b)? {
                return Ok(v);
            }
            if let Some(v) = log_side(b, a)? {
                return Ok(v);
            }
            Ok(ctx.exp(&enclose(ctx, e, n)?))
        }
        _ => Ok(ctx.exp(&enclose(ctx, e, n)?)),
    }
}

const FLOOR_ATTEMPTS: u32 = 5;

fn certify_floor<F>(magnitude_ln: f64, mut enclose_at: F) -> Result<BigUint>
where
    F: FnMut(u64) -> std::result::Result<Interval, Error>,
{
    let bits = (magnitude_ln.max(0.0) / std::f64::consts::LN_2).ceil() as u64;
    let base = 64 + bits;
    for attempt in 0..FLOOR_ATTEMPTS {
        let prec = base << attempt;
        let v = match enclose_at(prec) {
            Ok(v) => v,
            Err(Error::FloorAmbiguous { .. }) => continue,
            Err(e) => return Err(e),
        };
        let lo = v.lo.floor().to_integer();
        let hi = v.hi.floor().to_integer();
        if lo == hi {
            return lo
                .to_biguint()
                .ok_or_else(|| Error::Domain("negative floor for an exponential".into()));
        }
    }
    Err(Error::FloorAmbiguous {
        attempts: FLOOR_ATTEMPTS,
    })
}

fn fault_to_error(f: Fault, n: u64) -> Error {
    match f {
        Fault::Imprecise => Error::FloorAmbiguous { attempts: 0 },
        Fault::Domain(reason) => Error::NotANumber { n, reason },
    }
}

/// Certified enclosure of ψ(n) at `prec` significant bits.
pub fn enclose_psi(expr: &PsiExpr, n: u64, prec: u64) -> Result<Interval> {
    enclose(&Ctx { prec }, expr, n).map_err(|f| fault_to_error(f, n))
}

/// Exact `⌊e^{ψ(n)}⌋`. `approx_psi` is a binary64 estimate of ψ(n) used only
/// to size the working precision.
pub fn floor_exp_psi(expr: &PsiExpr, n: u64, approx_psi: f64) -> Result<BigUint> {
    certify_floor(approx_psi, |prec| {
        exp_enclose(&Ctx { prec }, expr, n).map_err(|f| fault_to_error(f, n))
    })
}

/// Exact `⌊e^y⌋`, reading the binary64 `y` as the exact dyadic it denotes.
pub fn floor_exp_f64(y: f64) -> Result<BigUint> {
    let x = Rational::from_float(y)
        .ok_or_else(|| Error::Domain(format!("exponent {y} is not finite")))?;
    certify_floor(y, |prec| {
        let (lo, hi) = exp_bounds(&x, prec);
        Ok(Interval { lo, hi })
    })
}

/// `⌊x⌋` for a nonnegative finite binary64, exactly.
pub fn floor_f64(x: f64) -> Result<BigUint> {
    let r = Rational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))?;
    let f = r.floor().to_integer();
    match f.sign() {
        Sign::Minus => Err(Error::Domain(format!("{x} is negative"))),
        _ => Ok(f.to_biguint().unwrap_or_default()),
    }
}

/// Midpoint of an interval as a binary64, for diagnostics.
pub fn approx(v: &Interval) -> f64 {
    ((&v.lo + &v.hi) / Rational::from_integer(2.into()))
        .to_f64()
        .unwrap_or(f64::NAN)
}
