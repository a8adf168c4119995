use thiserror::Error;

/// Errors produced by the expansion engine, the ψ evaluator, the solvers and
/// the set builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of an operation (e.g. a point outside (0, 1]).
    #[error("domain error: {0}")]
    Domain(String),

    /// A digit sequence contains a digit below 2.
    #[error("inadmissible digit {digit} at position {position} (digits must be >= 2)")]
    Admissibility { position: usize, digit: String },

    /// A position index is out of range for the sequence it refers to.
    #[error("index {index} out of range for sequence of length {len}")]
    Index { index: usize, len: usize },

    /// The ψ expression text could not be parsed.
    #[error("syntax error at byte offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    /// The ψ expression names a function or variable outside the grammar.
    #[error("unknown identifier `{name}` at byte offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    /// ψ(n) ≤ 0, which is outside ψ : ℕ → ℝ⁺.
    #[error("psi({n}) = {value} is not positive")]
    NonPositive { n: u64, value: f64 },

    /// Evaluation produced NaN (log of a negative, 0/0, ...).
    #[error("psi({n}) is not a number: {reason}")]
    NotANumber { n: u64, reason: String },

    /// The value exceeds the binary64 range.
    #[error("psi({n}) overflows binary64")]
    Overflow { n: u64 },

    /// A tabulated ψ was asked for an index past its end.
    #[error("psi table has {len} entries, index {n} requested")]
    TableRange { n: u64, len: usize },

    /// The growth profile does not support a case of the E_sup formula.
    #[error("inconclusive classification: {0}")]
    Inconclusive(String),

    /// Brute-force enumeration would exceed its configured size guard.
    #[error("enumeration of {requested} items exceeds guard {guard}")]
    Guard { requested: String, guard: u64 },

    /// The floor of an exponential could not be certified at any tried precision.
    #[error("floor of exp could not be certified after {attempts} precision attempts")]
    FloorAmbiguous { attempts: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Admissibility { .. } => "admissibility",
            Error::Index { .. } => "index",
            Error::Syntax { .. } => "syntax",
            Error::UnknownIdentifier { .. } => "unknown-identifier",
            Error::NonPositive { .. } => "non-positive",
            Error::NotANumber { .. } => "not-a-number",
            Error::Overflow { .. } => "overflow",
            Error::TableRange { .. } => "table-range",
            Error::Inconclusive(_) => "inconclusive",
            Error::Guard { .. } => "guard",
            Error::FloorAmbiguous { .. } => "floor-ambiguous",
        }
    }

    /// Byte offset into the ψ text, for parse errors.
    pub fn offset(&self) -> Option<usize> {
        match self {
            Error::Syntax { offset, .. } | Error::UnknownIdentifier { offset, .. } => Some(*offset),
            _ => None,
        }
    }
}
