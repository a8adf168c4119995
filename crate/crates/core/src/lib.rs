//! Exact Lüroth expansions, growth-function profiles and dimension formulas
//! for sets of reals whose Lüroth digits grow at a prescribed rate.

pub mod error;
pub mod estimators;
pub mod expansion;
pub mod numeric;
pub mod powersum;
pub mod psi;
pub mod rng;
pub mod serde_ext;
pub mod sets;
pub mod solvers;

pub use error::{Error, Result};
pub use expansion::{
    cylinder, digits, eliminate, luroth_step, parse_rational, periodicity, value_of, Cylinder,
    DigitSeq, Periodicity, Rational,
};
pub use psi::{growth_profile, parse_psi, CaseTag, GrowthProfile, Psi, PsiExpr};
