//! `verify` and `transform`.

use crate::config::Params;
use crate::record::{sibling, Outputs, RunRecord};
use crate::{TransformOp, Usage};
use anyhow::Result;
use doob_core::bitspace::{BitAssignment, Position, DEFAULT_SUPPORT_CAP};
use doob_core::lab::BitMatrix;
use doob_core::martingale::{
    convert_oracle_martingale, extend_to_array, repair, restrict_rows, savings_transform, upcrossing_transform,
    verify as verify_spec, Limits, MartingaleSpec, OracleMartingale, SavingsCheck, Trajectory, DEFAULT_HORIZON,
};
use doob_core::rational::{format_rational, parse_rational, Rational};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub fn limit_defaults() -> Params {
    Params {
        horizon: Some(DEFAULT_HORIZON),
        support_cap: Some(DEFAULT_SUPPORT_CAP),
        ..Params::default()
    }
}

/// Resolved parameters plus the command's own path arguments.
pub fn snapshot(p: &Params, paths: &[(&str, Option<&PathBuf>)]) -> Value {
    let mut v = p.snapshot();
    if let Value::Object(m) = &mut v {
        for (k, path) in paths {
            if let Some(path) = path {
                m.insert((*k).into(), json!(path.display().to_string()));
            }
        }
    }
    v
}

fn limits(p: &Params) -> Result<Limits> {
    Ok(Limits {
        horizon: p.horizon()?,
        support_cap: p.support_cap()?,
    })
}

/// Reads a JSON file. Syntax and schema errors are usage errors that name
/// the line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Usage(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
        .into()
    })
}

fn print_json(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

pub fn verify(p: &Params, spec: &Path, out: Option<&Path>, record: &mut RunRecord, outputs: &mut Outputs) -> Result<i32> {
    let m: MartingaleSpec = read_json(spec)?;
    let verdict = verify_spec(&m, limits(p)?)?;
    let report = json!({
        "spec": spec.display().to_string(),
        "levels": m.len(),
        "verdict": verdict,
    });
    print_json(&report)?;
    if let Some(out) = out {
        outputs.write_json(out, &report)?;
    }
    record.result = report;
    Ok(if verdict.is_verified() { 0 } else { 1 })
}

pub struct TransformArgs<'a> {
    pub op: TransformOp,
    pub spec: &'a Path,
    pub out: &'a Path,
    pub a: Option<&'a str>,
    pub b: Option<&'a str>,
    pub skip_savings_check: bool,
    pub sample: Option<&'a str>,
}

fn level(name: &str, s: Option<&str>) -> Result<Rational> {
    let s = s.ok_or_else(|| Usage(format!("upcross needs --{name}")))?;
    Ok(parse_rational(s).map_err(|e| Usage(format!("--{name}: {e}")))?)
}

fn support_union<'a>(specs: impl IntoIterator<Item = &'a MartingaleSpec>) -> Vec<Position> {
    let set: BTreeSet<Position> = specs
        .into_iter()
        .flat_map(|m| m.levels.iter().flat_map(|f| f.support().iter().copied()))
        .collect();
    set.into_iter().collect()
}

/// `rows` is a comma-separated list of 0/1 rows; unlisted bits are 0.
fn sample_assignment(rows: &str, positions: &[Position]) -> Result<BitAssignment> {
    let m = BitMatrix::parse(&rows.replace(',', "\n")).map_err(|e| Usage(format!("--sample: {e}")))?;
    Ok(positions.iter().map(|&p| (p, m.get(p))).collect())
}

pub fn transform(p: &Params, args: &TransformArgs<'_>, record: &mut RunRecord, outputs: &mut Outputs) -> Result<i32> {
    let limits = limits(p)?;
    if args.op != TransformOp::Upcross && (args.a.is_some() || args.b.is_some()) {
        return Err(Usage("--a and --b only apply to upcross".into()).into());
    }
    if args.op != TransformOp::ConvertOracle && args.skip_savings_check {
        return Err(Usage("--skip-savings-check only applies to convert-oracle".into()).into());
    }
    let mut extra = json!({});
    let (input, output) = if args.op == TransformOp::ConvertOracle {
        let o: OracleMartingale = read_json(args.spec)?;
        let check = if args.skip_savings_check {
            SavingsCheck::Skip
        } else {
            SavingsCheck::Enforce
        };
        (None, convert_oracle_martingale(&o, limits, check)?)
    } else {
        let m: MartingaleSpec = read_json(args.spec)?;
        let n = match args.op {
            TransformOp::Repair => {
                let r = repair(&m, limits)?;
                extra = json!({ "drift": r.drift.iter().map(format_rational).collect::<Vec<_>>() });
                r.martingale
            }
            TransformOp::Upcross => {
                let (a, b) = (level("a", args.a)?, level("b", args.b)?);
                extra = json!({ "a": format_rational(&a), "b": format_rational(&b) });
                upcrossing_transform(&m, &a, &b, limits)?
            }
            TransformOp::Savings => savings_transform(&m, limits)?,
            TransformOp::Extend => extend_to_array(&m, limits)?,
            TransformOp::Restrict => restrict_rows(&m)?,
            TransformOp::ConvertOracle => unreachable!(),
        };
        (Some(m), n)
    };
    let verdict = verify_spec(&output, limits)?;
    outputs.write_json(args.out, &output)?;
    let mut report = json!({
        "op": crate::value_name(&args.op),
        "spec": args.spec.display().to_string(),
        "levels": output.len(),
        "verdict": verdict,
    });
    if let (Value::Object(r), Value::Object(e)) = (&mut report, extra) {
        r.extend(e);
    }
    outputs.write_json(&sibling(args.out, ".verify.json"), &report)?;
    if let Some(rows) = args.sample {
        let sample = sample_assignment(rows, &support_union(input.iter().chain([&output])))?;
        let t = match (&input, args.op) {
            (Some(m), TransformOp::Upcross) => {
                m.upcrossing_trajectory(&sample, &level("a", args.a)?, &level("b", args.b)?)?
            }
            (Some(m), TransformOp::Savings) => m.savings_trajectory(&sample)?,
            _ => Trajectory {
                values: output.values_on(&sample)?,
                sample,
                stops: Vec::new(),
            },
        };
        outputs.write_csv(
            &sibling(args.out, ".trajectory.csv"),
            &["step", "value", "stop"],
            t.csv_rows(),
        )?;
    }
    record.result = report;
    Ok(if verdict.is_verified() { 0 } else { 1 })
}
