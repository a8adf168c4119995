use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a decimal number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive and finite"))
    }
}

fn finite_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a decimal number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` must be finite"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "luroth-dim", version, about = "Lüroth expansions and Hausdorff dimensions of digit-growth sets")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Worker threads for the Monte Carlo commands [default: available cores].
    #[arg(long, global = true, env = "LUROTH_DIM_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// First n digits of a rational x in (0,1] and the period of its digit stream.
    Expand(ExpandArgs),
    /// Value of the finite Lüroth series with the given digits.
    Value(DigitsArgs),
    /// Endpoints and length of the cylinder of a digit word.
    Cylinder(DigitsArgs),
    /// Preperiod and period of the digit stream of a rational.
    Period(PeriodArgs),
    /// Root of the bounded-digit equation: digits in [2, M].
    SolveSm(SolveSmArgs),
    /// Root of the scaled equation for a base B, optionally with digits bounded by M·B^n.
    SolveGb(SolveGbArgs),
    /// H(alpha) = G(e^alpha).
    HAlpha(HAlphaArgs),
    /// Growth profile of psi: alpha band, log A, log V, eta and the case tag.
    Profile(ProfileArgs),
    /// Dimension of the limsup, lim or liminf set for psi.
    Dim(DimArgs),
    /// Moran dimension of the schedule [u_n, 2u_n - 1].
    Moran(MoranArgs),
    /// Build a digit schedule.
    Build(BuildArgs),
    /// Sample points of a schedule.
    Sample(SampleArgs),
    /// Exhaustively check |I_n| >= |I_n*|^(1+eps) on a schedule.
    VerifyDistortion(VerifyDistortionArgs),
    /// Exhaustively check the pairwise gap estimate on a schedule.
    VerifyGap(VerifyGapArgs),
    /// Per-depth pressure-equation dimension estimate.
    Pressure(PressureArgs),
    /// Box-counting dimension of sampled schedule points.
    Boxdim(BoxdimArgs),
    /// Monte Carlo of the events d_n >= phi(n).
    Bb(BbArgs),
    /// Empirical digit frequencies against 1/(k(k-1)).
    DigitLaw(DigitLawArgs),
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct PsiArgs {
    /// Growth function as an expression in n, e.g. "n^2" or "exp(n)".
    #[arg(long, visible_alias = "phi")]
    pub psi: Option<String>,
    /// Growth function as a JSON file {"psi_table": [psi(1), psi(2), ...]}.
    #[arg(long, visible_alias = "phi-table", value_name = "FILE")]
    pub psi_table: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[group(required = false, multiple = false)]
pub struct OptPsiArgs {
    /// Growth function as an expression in n.
    #[arg(long)]
    pub psi: Option<String>,
    /// Growth function as a JSON table file.
    #[arg(long, value_name = "FILE")]
    pub psi_table: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExpandArgs {
    /// Rational p/q in (0, 1].
    #[arg(long)]
    pub x: String,
    /// Number of digits.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct DigitsArgs {
    /// Comma-separated digits, each at least 2.
    #[arg(long, value_delimiter = ',', required = true)]
    pub digits: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct PeriodArgs {
    /// Rational p/q in (0, 1].
    #[arg(long)]
    pub x: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveSmArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub m: u64,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-12, value_parser = positive_f64)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveGbArgs {
    /// Base B (B > 1 alone, B >= 1 with --m).
    #[arg(long, value_parser = positive_f64)]
    pub b: f64,
    /// Digit bound factor M, for digits in [B^n, M·B^n].
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub m: Option<u64>,
    /// Terms summed directly before the asymptotic tail.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub truncation: Option<u64>,
    #[arg(long, default_value_t = 1e-12, value_parser = positive_f64)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct HAlphaArgs {
    #[arg(long, value_parser = positive_f64)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-12, value_parser = positive_f64)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub psi: PsiArgs,
    /// Largest n examined.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(4..))]
    pub horizon: u64,
    /// First n of the tail window [default: ceil(horizon/2)].
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub tail_start: Option<u64>,
    /// Tolerance of the case classification.
    #[arg(long, default_value_t = 1e-3, value_parser = positive_f64)]
    pub class_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    Sup,
    Mean,
    Inf,
}

#[derive(Debug, Args, Serialize)]
pub struct DimArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// limsup (sup), lim (mean) or liminf (inf) set.
    #[arg(long, value_enum, default_value_t = Which::Sup)]
    pub which: Which,
    /// Solver tolerance.
    #[arg(long, default_value_t = 1e-12, value_parser = positive_f64)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
#[group(skip)]
#[command(group(ArgGroup::new("u_source").required(true).args(["u", "u_table"])))]
pub struct MoranArgs {
    /// u_n as an expression in n (u_n >= 4).
    #[arg(long)]
    pub u: Option<String>,
    /// u_n as a JSON table file {"psi_table": [...]}.
    #[arg(long, value_name = "FILE")]
    pub u_table: Option<PathBuf>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    /// Digits in [2, M], pinned to floor(e^psi(n)) + 1 at n = 2^k.
    EmPsi,
    /// Digits in [2, M], and in [floor(B^n) + 2, 2 floor(B^n) + 1] at sparse positions.
    FMb,
    /// Digits in [M c_n, 2M c_n - 1] with c_n = floor(e^psi(n)) + 1.
    W,
    /// Centers from the r_n sequence.
    Rn,
    /// Centers from the L_n(eps) sequence.
    Ln,
    /// Digits in [lo, hi] at every level.
    Const,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildParams {
    #[command(flatten)]
    pub psi: OptPsiArgs,
    /// M (em-psi, f-mb, const-free sets; 0 or absent picks the least admissible M for centered sets).
    #[arg(long)]
    pub m: Option<u64>,
    /// Base B as p/q (f-mb).
    #[arg(long)]
    pub b: Option<String>,
    /// A for r_n [default: exp(log A) from the growth profile].
    #[arg(long, value_parser = finite_f64)]
    pub a: Option<f64>,
    /// V for L_n [default: exp(log V) from the growth profile].
    #[arg(long, value_parser = finite_f64)]
    pub v: Option<f64>,
    /// epsilon of the r_n and L_n sequences.
    #[arg(long, default_value_t = 0.1, value_parser = positive_f64)]
    pub epsilon: f64,
    /// Lower digit bound (const).
    #[arg(long)]
    pub lo: Option<u64>,
    /// Upper digit bound (const).
    #[arg(long)]
    pub hi: Option<u64>,
    /// Horizon for theta, L_n and the growth profile.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(4..))]
    pub horizon: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub set: SetKind,
    #[command(flatten)]
    pub params: BuildParams,
    /// Number of levels.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
}

#[derive(Debug, Args, Serialize)]
#[group(skip)]
#[command(group(ArgGroup::new("schedule_source").required(true).args(["schedule", "set"])))]
pub struct ScheduleArgs {
    /// Schedule JSON as written by `build`.
    #[arg(long, value_name = "FILE")]
    pub schedule: Option<PathBuf>,
    /// Build the schedule inline instead.
    #[arg(long, value_enum)]
    pub set: Option<SetKind>,
    #[command(flatten)]
    pub params: BuildParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Min,
    Max,
    SeededRandom,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    #[arg(long, value_enum, default_value_t = Mode::SeededRandom)]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of points (stream i gives point i).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    /// Report log d_n / psi(n) at these n (needs --psi).
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyDistortionArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Exponent slack as p/q.
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    /// Largest number of words enumerated.
    #[arg(long, default_value_t = 1_000_000)]
    pub guard: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyGapArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub guard: u64,
    /// Largest number of word pairs compared.
    #[arg(long, default_value_t = 10_000_000)]
    pub pair_guard: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct PressureArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    #[arg(long, default_value_t = 1e-12, value_parser = positive_f64)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BoxdimArgs {
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value_t = 18, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    /// Number of random points.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1000..))]
    pub points: u64,
    /// Use every cylinder's left endpoint instead of random points.
    #[arg(long)]
    pub exhaustive: bool,
    /// Coarsest scale 2^-jmin.
    #[arg(long, default_value_t = 2)]
    pub jmin: u32,
    /// Finest scale 2^-jmax.
    #[arg(long, default_value_t = 12)]
    pub jmax: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct BbArgs {
    #[command(flatten)]
    pub psi: PsiArgs,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct DigitLawArgs {
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(2..))]
    pub kmax: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
