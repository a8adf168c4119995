use std::path::Path;

use luroth_dim::estimators::{bb_simulate, box_dim, cylinder_points, digit_law_test, membership_diagnostic, pressure_dim};
use luroth_dim::psi::classify_case;
use luroth_dim::serde_ext::big_to_json;
use luroth_dim::sets::{
    build_l_sequence, build_r_sequence, floors_from_ln, floors_from_psi, sample_point_stream, schedule_em_psi,
    schedule_fmb, schedule_from_centers, verify_distortion, verify_gap, DigitSchedule, SampleMode,
};
use luroth_dim::solvers::{dim_e, dim_einf, dim_esup, h_alpha, moran_dim, solve_gb, solve_gb_with, solve_gmb, solve_sm};
use luroth_dim::{cylinder, digits, growth_profile, parse_rational, periodicity, value_of, CaseTag, DigitSeq, Error, GrowthProfile, Psi};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::render::Table;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Res<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
}

pub struct Outcome {
    pub status: Status,
    pub result: Value,
    pub table: Option<Table>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            status: Status::Ok,
            result,
            table: None,
        }
    }

    fn with_table(mut self, records: &Value, columns: &[&str]) -> Self {
        self.table = Some(Table::from_records(records, columns));
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn read_file(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_psi_from(expr: &Option<String>, table: &Option<std::path::PathBuf>) -> Res<Option<Psi>> {
    Ok(match (expr, table) {
        (Some(text), _) => Some(Psi::parse(text)?),
        (None, Some(path)) => Some(Psi::from_table_json(&read_file(path)?)?),
        (None, None) => None,
    })
}

fn load_psi(a: &PsiArgs) -> Res<Psi> {
    load_psi_from(&a.psi, &a.psi_table)?.ok_or_else(|| CliError::Usage("--psi or --psi-table is required".into()))
}

fn need_psi(p: &BuildParams) -> Res<Psi> {
    load_psi_from(&p.psi.psi, &p.psi.psi_table)?
        .ok_or_else(|| CliError::Usage("this set needs --psi or --psi-table".into()))
}

fn parse_digits(items: &[String]) -> Res<DigitSeq> {
    let digits = items
        .iter()
        .map(|s| {
            s.trim()
                .parse::<BigUint>()
                .map_err(|_| CliError::Usage(format!("`{s}` is not a non-negative integer digit")))
        })
        .collect::<Res<Vec<_>>>()?;
    Ok(DigitSeq::new(digits)?)
}

fn profile_of(a: &ProfileArgs) -> Res<(Psi, GrowthProfile)> {
    let psi = load_psi(&a.psi)?;
    let mut p = growth_profile(&psi, a.horizon, a.tail_start)?;
    p.case_tag = classify_case(&p, a.class_tol);
    Ok((psi, p))
}

fn build_schedule(set: SetKind, p: &BuildParams, depth: usize) -> Res<(DigitSchedule, Option<Value>)> {
    let horizon = p.horizon.max(depth as u64);
    Ok(match set {
        SetKind::EmPsi => (schedule_em_psi(&need_psi(p)?, p.m.unwrap_or(2), depth)?, None),
        SetKind::FMb => {
            let b = p.b.as_deref().ok_or_else(|| CliError::Usage("f-mb needs --b p/q".into()))?;
            (schedule_fmb(&parse_rational(b)?, p.m.unwrap_or(2), depth)?, None)
        }
        SetKind::W => {
            let psi = need_psi(p)?;
            let params = json!({"psi": psi.to_string(), "depth": depth});
            (schedule_from_centers("w", params, &floors_from_psi(&psi, depth)?, p.m.unwrap_or(0))?, None)
        }
        SetKind::Rn => {
            let psi = need_psi(p)?;
            let a = match p.a {
                Some(a) => a,
                None => growth_profile(&psi, horizon, None)?.log_a.exp().max(1.0),
            };
            let seq = build_r_sequence(&psi, a, p.epsilon, depth, horizon)?;
            let floors = floors_from_ln(&seq.log_r())?;
            let params = json!({"psi": psi.to_string(), "A": a, "epsilon": p.epsilon, "depth": depth});
            (schedule_from_centers("rn", params, &floors, p.m.unwrap_or(0))?, Some(to_value(&seq)))
        }
        SetKind::Ln => {
            let psi = need_psi(p)?;
            let v = match p.v {
                Some(v) => v,
                None => growth_profile(&psi, horizon, None)?.log_v.exp().max(1.0),
            };
            let seq = build_l_sequence(&psi, v, p.epsilon, depth, horizon)?;
            let log_l: Vec<f64> = seq.ln_log.iter().map(|l| l.exp()).collect();
            let floors = floors_from_ln(&log_l)?;
            let params = json!({"psi": psi.to_string(), "V": v, "epsilon": p.epsilon, "depth": depth});
            (schedule_from_centers("ln", params, &floors, p.m.unwrap_or(0))?, Some(to_value(&seq)))
        }
        SetKind::Const => {
            let hi = p.hi.ok_or_else(|| CliError::Usage("const needs --hi".into()))?;
            (DigitSchedule::constant(p.lo.unwrap_or(2), hi, depth)?, None)
        }
    })
}

fn resolve_schedule(a: &ScheduleArgs, depth: usize) -> Res<(DigitSchedule, Option<Value>)> {
    match (&a.schedule, a.set) {
        (Some(path), _) => {
            let s: DigitSchedule = serde_json::from_str(&read_file(path)?)
                .map_err(|e| CliError::Core(Error::Domain(format!("bad schedule file: {e}"))))?;
            let s = DigitSchedule::new(&s.label, s.params, s.ranges, s.pinned)?;
            if s.depth() < depth {
                return Err(Error::Domain(format!("schedule has {} levels, {depth} needed", s.depth())).into());
            }
            Ok((s, None))
        }
        (None, Some(set)) => build_schedule(set, &a.params, depth),
        (None, None) => Err(CliError::Usage("--schedule or --set is required".into())),
    }
}

fn schedule_table(s: &DigitSchedule) -> Table {
    Table {
        headers: vec!["level".into(), "lo".into(), "hi".into(), "pinned".into()],
        rows: s
            .ranges
            .iter()
            .enumerate()
            .map(|(i, (lo, hi))| vec![(i + 1).to_string(), lo.to_string(), hi.to_string(), s.pinned.contains(&(i + 1)).to_string()])
            .collect(),
    }
}

pub fn execute(cmd: &Command, workers: usize) -> Res<Outcome> {
    match cmd {
        Command::Expand(a) => {
            let x = parse_rational(&a.x)?;
            let ds = digits(&x, a.n as usize)?;
            let convergent = value_of(&ds)?;
            let per = periodicity(&x)?;
            let records: Vec<Value> = ds
                .digits()
                .iter()
                .enumerate()
                .map(|(i, d)| json!({"n": i + 1, "digit": big_to_json(d)}))
                .collect();
            let records = Value::Array(records);
            Ok(Outcome::ok(json!({
                "x": x.to_string(),
                "n": a.n,
                "digits": ds,
                "convergent": convergent.to_string(),
                "error": (&x - &convergent).to_string(),
                "periodicity": per,
            }))
            .with_table(&records, &["n", "digit"]))
        }
        Command::Value(a) => {
            let ds = parse_digits(&a.digits)?;
            let v = value_of(&ds)?;
            Ok(Outcome::ok(json!({
                "digits": ds,
                "value": v.to_string(),
                "approx": v.to_f64(),
            })))
        }
        Command::Cylinder(a) => {
            let ds = parse_digits(&a.digits)?;
            let c = cylinder(&ds)?;
            Ok(Outcome::ok(json!({
                "digits": ds,
                "left": c.left.to_string(),
                "right": c.right.to_string(),
                "length": c.length.to_string(),
                "q": big_to_json(&c.q),
                "interval": "half-open (left, right]",
            })))
        }
        Command::Period(a) => {
            let x = parse_rational(&a.x)?;
            Ok(Outcome::ok(json!({"x": x.to_string(), "periodicity": periodicity(&x)?})))
        }
        Command::SolveSm(a) => Ok(Outcome::ok(to_value(&solve_sm(a.m, a.tol)?))),
        Command::SolveGb(a) => {
            let r = match (a.m, a.truncation) {
                (Some(m), _) => solve_gmb(m, a.b, a.tol)?,
                (None, Some(k)) => solve_gb_with(a.b, a.tol, k)?,
                (None, None) => solve_gb(a.b, a.tol)?,
            };
            Ok(Outcome::ok(to_value(&r)))
        }
        Command::HAlpha(a) => Ok(Outcome::ok(to_value(&h_alpha(a.alpha, a.tol)?))),
        Command::Profile(a) => {
            let (_, p) = profile_of(a)?;
            let v = to_value(&p);
            let mut out = Outcome::ok(v.clone()).with_table(&v["checkpoints"], &["n", "ratio", "ln_ratio"]);
            if p.case_tag == CaseTag::Inconclusive {
                out.status = Status::Inconclusive;
            }
            Ok(out)
        }
        Command::Dim(a) => {
            let (_, p) = profile_of(&a.profile)?;
            let r = match a.which {
                Which::Sup => match dim_esup(&p, a.tol) {
                    Ok(r) => r,
                    Err(Error::Inconclusive(reason)) => {
                        return Ok(Outcome {
                            status: Status::Inconclusive,
                            result: json!({"reason": reason, "profile": p}),
                            table: None,
                        })
                    }
                    Err(e) => return Err(e.into()),
                },
                Which::Mean => dim_e(&p),
                Which::Inf => dim_einf(&p),
            };
            Ok(Outcome::ok(to_value(&r)))
        }
        Command::Moran(a) => {
            let u = load_psi_from(&a.u, &a.u_table)?.ok_or_else(|| CliError::Usage("--u or --u-table is required".into()))?;
            let ln_u = (1..=a.horizon + 1).map(|n| u.ln(n)).collect::<luroth_dim::Result<Vec<f64>>>()?;
            let mut r = moran_dim(&ln_u, a.horizon as usize)?;
            if let Value::Object(m) = &mut r.inputs {
                m.insert("u".into(), json!(u.to_string()));
            }
            Ok(Outcome::ok(to_value(&r)))
        }
        Command::Build(a) => {
            let (s, seq) = build_schedule(a.set, &a.params, a.depth as usize)?;
            let table = schedule_table(&s);
            let mut result = json!({"schedule": s});
            if let Some(seq) = seq {
                result["sequence"] = seq;
            }
            Ok(Outcome {
                status: Status::Ok,
                result,
                table: Some(table),
            })
        }
        Command::Sample(a) => {
            let depth = a.depth as usize;
            let (s, _) = resolve_schedule(&a.schedule, depth)?;
            let mode = match a.mode {
                Mode::Min => SampleMode::Min,
                Mode::Max => SampleMode::Max,
                Mode::SeededRandom => SampleMode::SeededRandom,
            };
            let psi = if a.checkpoints.is_empty() {
                None
            } else {
                Some(need_psi(&a.schedule.params)?)
            };
            let mut points = Vec::with_capacity(a.count as usize);
            for i in 0..a.count {
                let p = sample_point_stream(&s, depth, mode, a.seed, i)?;
                let mut v = json!({"stream": i, "x": p.x.to_string(), "approx": p.x.to_f64(), "digits": p.digits});
                if let Some(psi) = &psi {
                    v["membership"] = to_value(&membership_diagnostic(&p.digits, psi, &a.checkpoints)?);
                }
                points.push(v);
            }
            let points = Value::Array(points);
            Ok(Outcome::ok(json!({"schedule": s, "depth": depth, "points": points}))
                .with_table(&points, &["stream", "x", "digits"]))
        }
        Command::VerifyDistortion(a) => {
            let depth = a.depth as usize;
            let (s, _) = resolve_schedule(&a.schedule, depth)?;
            let eps = parse_rational(&a.eps)?;
            let r = to_value(&verify_distortion(&s, &eps, depth, a.guard)?);
            Ok(Outcome::ok(r.clone()).with_table(&r["levels"], &["n", "words", "min_ratio", "violations"]))
        }
        Command::VerifyGap(a) => {
            let depth = a.depth as usize;
            let (s, _) = resolve_schedule(&a.schedule, depth + 1)?;
            let m = a
                .schedule
                .params
                .m
                .or_else(|| s.params.get("M").and_then(Value::as_u64))
                .ok_or_else(|| CliError::Usage("verify-gap needs --m".into()))?;
            Ok(Outcome::ok(to_value(&verify_gap(&s, m, depth, a.guard, a.pair_guard)?)))
        }
        Command::Pressure(a) => {
            let depth = a.depth as usize;
            let (s, _) = resolve_schedule(&a.schedule, depth)?;
            let t = to_value(&pressure_dim(&s, depth, a.tol)?);
            Ok(Outcome::ok(t.clone()).with_table(&t["records"], &["index", "estimate", "residual"]))
        }
        Command::Boxdim(a) => {
            let depth = a.depth as usize;
            let (s, _) = resolve_schedule(&a.schedule, depth)?;
            let points = if a.exhaustive {
                cylinder_points(&s, depth, 1 << 22)?
            } else {
                (0..a.points)
                    .map(|i| sample_point_stream(&s, depth, SampleMode::SeededRandom, a.seed, i).map(|p| p.x))
                    .collect::<luroth_dim::Result<Vec<_>>>()?
            };
            if a.jmin >= a.jmax {
                return Err(CliError::Usage("need jmin < jmax".into()));
            }
            let scales: Vec<u32> = (a.jmin..=a.jmax).collect();
            let t = to_value(&box_dim(&points, &scales)?);
            let mut out = Outcome::ok(t.clone()).with_table(&t["records"], &["delta", "count"]);
            out.result["points"] = json!(points.len());
            Ok(out)
        }
        Command::Bb(a) => {
            let psi = load_psi(&a.psi)?;
            let r = to_value(&bb_simulate(&psi, a.samples, a.depth, a.seed, workers)?);
            Ok(Outcome::ok(r.clone()).with_table(
                &r["levels"],
                &["n", "phi", "probability", "events", "frequency", "sigma", "within_3sigma", "flagged"],
            ))
        }
        Command::DigitLaw(a) => {
            let r = to_value(&digit_law_test(a.samples, a.depth, a.kmax, a.seed, workers)?);
            Ok(Outcome::ok(r.clone()).with_table(
                &r["rows"],
                &["k", "tail", "probability", "frequency", "sigma", "within_3sigma"],
            ))
        }
    }
}
