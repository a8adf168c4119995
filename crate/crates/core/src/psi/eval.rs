//! Numeric evaluation of ψ(n).
//!
//! Plain binary64 evaluation is tried first. When it overflows or
//! underflows, the tree is re-evaluated with [`LogNum`], a sign/log-magnitude
//! representation, so that `ln ψ(n)` stays available for functions such as
//! `exp(n^2)` whose values leave the binary64 range.

use super::parse::{BinOp, Func, PsiExpr};
use crate::error::{Error, Result};
use crate::numeric::{ln_add_exp, ln_sub_exp};

/// A real number stored as `sign · e^ln_abs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNum {
    sign: i8,
    ln_abs: f64,
}

impl LogNum {
    pub const ZERO: LogNum = LogNum {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_f64(x: f64) -> LogNum {
        if x == 0.0 {
            LogNum::ZERO
        } else {
            LogNum {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn positive_from_ln(ln_abs: f64) -> LogNum {
        if ln_abs == f64::NEG_INFINITY {
            LogNum::ZERO
        } else {
            LogNum { sign: 1, ln_abs }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * self.ln_abs.exp()
    }

    fn neg(self) -> LogNum {
        LogNum {
            sign: -self.sign,
            ..self
        }
    }

    fn add(self, other: LogNum) -> LogNum {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        if self.sign == other.sign {
            return LogNum {
                sign: self.sign,
                ln_abs: ln_add_exp(self.ln_abs, other.ln_abs),
            };
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        if big.ln_abs == small.ln_abs {
            return LogNum::ZERO;
        }
        LogNum {
            sign: big.sign,
            ln_abs: ln_sub_exp(big.ln_abs, small.ln_abs),
        }
    }

    fn mul(self, other: LogNum) -> LogNum {
        if self.sign == 0 || other.sign == 0 {
            return LogNum::ZERO;
        }
        LogNum {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }
}

/// Why an evaluation path failed, before a value of `n` is attached.
enum Fault {
    Nan(&'static str),
    Overflow,
}

fn eval_f64(e: &PsiExpr, n: f64) -> f64 {
    match e {
        PsiExpr::Num(lit) => lit.value,
        PsiExpr::N => n,
        PsiExpr::Neg(a) => -eval_f64(a, n),
        PsiExpr::Bin(op, a, b) => {
            let (x, y) = (eval_f64(a, n), eval_f64(b, n));
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => x.powf(y),
            }
        }
        PsiExpr::Call(func, a) => {
            let x = eval_f64(a, n);
            match func {
                Func::Log => x.ln(),
                Func::Log2 => x.log2(),
                Func::Exp => x.exp(),
                Func::Sqrt => x.sqrt(),
                Func::Floor => x.floor(),
            }
        }
    }
}

/// Intermediate value: a plain binary64 while one is representable,
/// otherwise a [`LogNum`].
#[derive(Clone, Copy)]
enum Val {
    F(f64),
    L(LogNum),
}

impl Val {
    fn log(self) -> LogNum {
        match self {
            Val::F(x) => LogNum::from_f64(x),
            Val::L(v) => v,
        }
    }
}

/// Keeps a binary64 result when it is finite and did not underflow to zero.
fn keep(r: f64, zero_ok: bool) -> Option<Val> {
    (r.is_finite() && (r != 0.0 || zero_ok) && (r == 0.0 || r.abs() >= f64::MIN_POSITIVE))
        .then_some(Val::F(r))
}

fn eval_log(e: &PsiExpr, n: f64) -> std::result::Result<Val, Fault> {
    Ok(match e {
        PsiExpr::Num(lit) => Val::F(lit.value),
        PsiExpr::N => Val::F(n),
        PsiExpr::Neg(a) => match eval_log(a, n)? {
            Val::F(x) => Val::F(-x),
            Val::L(v) => Val::L(v.neg()),
        },
        PsiExpr::Bin(op, a, b) => {
            let x = eval_log(a, n)?;
            let y = eval_log(b, n)?;
            if let (Val::F(xf), Val::F(yf)) = (x, y) {
                let direct = match op {
                    BinOp::Add => keep(xf + yf, true),
                    BinOp::Sub => keep(xf - yf, true),
                    BinOp::Mul => keep(xf * yf, xf == 0.0 || yf == 0.0),
                    BinOp::Div if yf == 0.0 => return Err(Fault::Nan("division by zero")),
                    BinOp::Div => keep(xf / yf, xf == 0.0),
                    BinOp::Pow => keep(xf.powf(yf), xf == 0.0),
                };
                if let Some(v) = direct {
                    return Ok(v);
                }
            }
            let (x, y) = (x.log(), y.log());
            Val::L(match op {
                BinOp::Add => x.add(y),
                BinOp::Sub => x.add(y.neg()),
                BinOp::Mul => x.mul(y),
                BinOp::Div => {
                    if y.sign == 0 {
                        return Err(Fault::Nan("division by zero"));
                    }
                    x.mul(LogNum {
                        sign: y.sign,
                        ln_abs: -y.ln_abs,
                    })
                }
                BinOp::Pow => pow_log(x, y)?,
            })
        }
        PsiExpr::Call(func, a) => {
            let x = eval_log(a, n)?;
            match (func, x) {
                (Func::Log | Func::Log2, _) => {
                    let ln = match x {
                        Val::F(v) if v > 0.0 => {
                            if *func == Func::Log {
                                return Ok(Val::F(v.ln()));
                            }
                            return Ok(Val::F(v.log2()));
                        }
                        Val::L(v) if v.sign > 0 => v.ln_abs,
                        _ => return Err(Fault::Nan("log of a nonpositive value")),
                    };
                    Val::F(if *func == Func::Log {
                        ln
                    } else {
                        ln / std::f64::consts::LN_2
                    })
                }
                (Func::Exp, Val::F(v)) => {
                    if v == f64::INFINITY {
                        return Err(Fault::Overflow);
                    }
                    keep(v.exp(), false).unwrap_or(Val::L(LogNum::positive_from_ln(v)))
                }
                (Func::Exp, Val::L(v)) => {
                    let v = v.to_f64();
                    if v == f64::INFINITY {
                        return Err(Fault::Overflow);
                    }
                    Val::L(LogNum::positive_from_ln(v))
                }
                (Func::Sqrt, Val::F(v)) if v >= 0.0 => Val::F(v.sqrt()),
                (Func::Sqrt, Val::L(v)) if v.sign >= 0 => Val::L(LogNum {
                    sign: v.sign,
                    ln_abs: 0.5 * v.ln_abs,
                }),
                (Func::Sqrt, _) => return Err(Fault::Nan("sqrt of a negative value")),
                (Func::Floor, Val::F(v)) => Val::F(v.floor()),
                // values outside binary64 range have no representable fraction
                (Func::Floor, Val::L(v)) => Val::L(v),
            }
        }
    })
}

fn pow_log(base: LogNum, exp: LogNum) -> std::result::Result<LogNum, Fault> {
    let y = exp.to_f64();
    if base.sign == 0 {
        return if y > 0.0 {
            Ok(LogNum::ZERO)
        } else {
            Err(Fault::Nan("zero to a nonpositive power"))
        };
    }
    if y.is_infinite() {
        return Err(Fault::Overflow);
    }
    let ln_abs = y * base.ln_abs;
    if base.sign > 0 {
        return Ok(LogNum::positive_from_ln(ln_abs));
    }
    if y.fract() != 0.0 {
        return Err(Fault::Nan("negative base with non-integer exponent"));
    }
    let odd = (y / 2.0).fract() != 0.0;
    Ok(LogNum {
        sign: if odd { -1 } else { 1 },
        ln_abs,
    })
}

fn fault_error(f: Fault, n: u64) -> Error {
    match f {
        Fault::Nan(reason) => Error::NotANumber {
            n,
            reason: reason.into(),
        },
        Fault::Overflow => Error::Overflow { n },
    }
}

/// `ln ψ(n)` for `n ≥ 1`, valid even when ψ(n) itself exceeds binary64.
pub fn eval_ln(expr: &PsiExpr, n: u64) -> Result<f64> {
    let nf = n as f64;
    let direct = eval_f64(expr, nf);
    if direct.is_finite() && direct >= f64::MIN_POSITIVE {
        return Ok(direct.ln());
    }
    let v = match eval_log(expr, nf).map_err(|f| fault_error(f, n))? {
        Val::F(x) if x > 0.0 => return Ok(x.ln()),
        Val::F(x) => return Err(Error::NonPositive { n, value: x }),
        Val::L(v) => v,
    };
    if v.ln_abs.is_nan() {
        return Err(Error::NotANumber {
            n,
            reason: "indeterminate form".into(),
        });
    }
    if v.sign <= 0 {
        return Err(Error::NonPositive {
            n,
            value: v.to_f64(),
        });
    }
    if v.ln_abs == f64::INFINITY {
        return Err(Error::Overflow { n });
    }
    Ok(v.ln_abs)
}

/// ψ(n) as a binary64; overflow is an error rather than `+inf`.
pub fn eval_psi(expr: &PsiExpr, n: u64) -> Result<f64> {
    let nf = n as f64;
    let direct = eval_f64(expr, nf);
    if direct.is_finite() {
        return if direct > 0.0 {
            Ok(direct)
        } else {
            Err(Error::NonPositive { n, value: direct })
        };
    }
    let ln = eval_ln(expr, n)?;
    let v = ln.exp();
    if v.is_infinite() {
        return Err(Error::Overflow { n });
    }
    Ok(v)
}
