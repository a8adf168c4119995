//! Growth functions ψ : ℕ → ℝ⁺, given as DSL expressions or tables.

mod enclosure;
mod eval;
mod parse;
mod profile;

pub use enclosure::{approx, enclose_psi, floor_exp_f64, floor_exp_psi, floor_f64, Interval};
pub use eval::{eval_ln, eval_psi, LogNum};
pub use parse::{parse_psi, BinOp, Func, Literal, PsiExpr};
pub use profile::{
    classify_case, growth_profile, theta, theta_ln_table, CaseTag, GrowthProfile, Theta,
    DEFAULT_HORIZON, DEFAULT_TOL,
};

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A growth function: either a parsed expression or a 1-based table.
#[derive(Debug, Clone, PartialEq)]
pub enum Psi {
    Expr { text: String, expr: PsiExpr },
    Table(Vec<f64>),
}

#[derive(Deserialize, Serialize)]
struct TableFile {
    psi_table: Vec<f64>,
}

impl Psi {
    pub fn parse(text: &str) -> Result<Psi> {
        Ok(Psi::Expr {
            text: text.to_string(),
            expr: parse_psi(text)?,
        })
    }

    pub fn table(values: Vec<f64>) -> Psi {
        Psi::Table(values)
    }

    /// Reads `{"psi_table": [v1, v2, …]}`.
    pub fn from_table_json(json: &str) -> Result<Psi> {
        let file: TableFile = serde_json::from_str(json)
            .map_err(|e| Error::Domain(format!("invalid psi table: {e}")))?;
        Ok(Psi::Table(file.psi_table))
    }

    pub fn table_json(values: &[f64]) -> String {
        serde_json::to_string(&TableFile {
            psi_table: values.to_vec(),
        })
        .expect("finite table")
    }

    /// Largest `n` at which ψ is defined, if bounded.
    pub fn max_n(&self) -> Option<u64> {
        match self {
            Psi::Expr { .. } => None,
            Psi::Table(v) => Some(v.len() as u64),
        }
    }

    fn table_value(v: &[f64], n: u64) -> Result<f64> {
        if n == 0 || n as usize > v.len() {
            return Err(Error::TableRange { n, len: v.len() });
        }
        let x = v[n as usize - 1];
        if x.is_nan() {
            return Err(Error::NotANumber {
                n,
                reason: "table entry is NaN".into(),
            });
        }
        if x.is_infinite() {
            return Err(Error::Overflow { n });
        }
        if x <= 0.0 {
            return Err(Error::NonPositive { n, value: x });
        }
        Ok(x)
    }

    /// ψ(n) as a binary64.
    pub fn value(&self, n: u64) -> Result<f64> {
        match self {
            Psi::Expr { expr, .. } => eval_psi(expr, n),
            Psi::Table(v) => Psi::table_value(v, n),
        }
    }

    /// `ln ψ(n)`, available even when ψ(n) overflows binary64.
    pub fn ln(&self, n: u64) -> Result<f64> {
        match self {
            Psi::Expr { expr, .. } => eval_ln(expr, n),
            Psi::Table(v) => Psi::table_value(v, n).map(f64::ln),
        }
    }

    /// Exact `⌊e^{ψ(n)}⌋ + 1`.
    pub fn pinned_digit(&self, n: u64) -> Result<BigUint> {
        let f = match self {
            Psi::Expr { expr, .. } => floor_exp_psi(expr, n, eval_psi(expr, n)?)?,
            Psi::Table(v) => floor_exp_f64(Psi::table_value(v, n)?)?,
        };
        Ok(f + 1u32)
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Expr { text, .. } => write!(f, "{text}"),
            Psi::Table(v) => write!(f, "table[{}]", v.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_semantics() {
        let p = Psi::from_table_json(r#"{"psi_table": [11, 4, 13.5]}"#).unwrap();
        assert_eq!(p.value(1).unwrap(), 11.0);
        assert_eq!(p.value(3).unwrap(), 13.5);
        assert_eq!(p.value(4), Err(Error::TableRange { n: 4, len: 3 }));
        assert_eq!(p.value(0), Err(Error::TableRange { n: 0, len: 3 }));
        let q = Psi::from_table_json(r#"{"psi_table": [1, -2]}"#).unwrap();
        assert!(matches!(q.value(2), Err(Error::NonPositive { n: 2, .. })));
        assert!(Psi::from_table_json("[1,2]").is_err());
    }

    #[test]
    fn pinned_digits() {
        let p = Psi::parse("log(n+1)").unwrap();
        assert_eq!(p.pinned_digit(2).unwrap(), BigUint::from(4u32));
        assert_eq!(p.pinned_digit(4).unwrap(), BigUint::from(6u32));
        let p = Psi::parse("n").unwrap();
        assert_eq!(p.pinned_digit(2).unwrap(), BigUint::from(8u32));
        assert_eq!(p.pinned_digit(4).unwrap(), BigUint::from(55u32));
    }
}
