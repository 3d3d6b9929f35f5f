//! `simulate`: games, convergence diagnostics and Brownian experiments.
//! All randomness comes from named children of the root seed.

use crate::commands::read_json;
use crate::config::Params;
use crate::record::{Outputs, RunRecord};
use crate::{SimulateKind, Usage};
use anyhow::Result;
use doob_core::bitspace::{BitAssignment, Position};
use doob_core::brownian::{
    bits_to_path, hitting_time, local_extrema, path_to_bits, remark_counterexample, sample_paths,
    select_nonatom_levels, ContinuousSavings, ContinuousUpcrossing, GridPath, HitTime, Markov, PathMartingale,
};
use doob_core::lab::{
    convergence_report, run_game, AllInOnZero, BinaryExpansion, BitSource, ConvergenceOptions, DecayingProduct,
    GameConfig, GameMartingale, HashedStrategy, OracleCopy, RowSchedule, RowStrategy, SampleMartingale,
    ScenarioSource, ZeroStake,
};
use doob_core::martingale::MartingaleSpec;
use doob_core::rational::{format_rational, rat, to_f64, Rational};
use doob_core::rng::named_seed;
use num::rational::Rational64;
use num::ToPrimitive;
use serde_json::json;
use std::path::Path;
use std::sync::Arc;

/// Paths written to `paths.csv` by bm-experiment.
const PATHS_CSV: usize = 16;
/// Paths whose extrema choose the upcrossing band.
const PILOT: usize = 200;

pub fn defaults(kind: SimulateKind) -> Params {
    let s = |x: &str| Some(x.to_string());
    match kind {
        SimulateKind::Game => Params {
            samples: Some(1_000),
            horizon: Some(10),
            scenario: s("uniform"),
            strategy: s("hashed"),
            start_capital: s("1"),
            ..Params::default()
        },
        SimulateKind::Convergence => Params {
            samples: Some(10_000),
            horizon: Some(256),
            scenario: s("uniform"),
            martingale: s("binary-expansion"),
            epsilon: Some(0.1),
            start_capital: s("1"),
            ..Params::default()
        },
        SimulateKind::BmExperiment => Params {
            samples: Some(10_000),
            t: s("1"),
            dt: s("1/256"),
            ..Params::default()
        },
        SimulateKind::Counterexample => Params {
            radius: Some(8.0),
            tol: Some(1e-8),
            ..Params::default()
        },
        SimulateKind::IsoRoundtrip => Params {
            samples: Some(1_000),
            t: s("1"),
            depth: Some(3),
            qbits: Some(8),
            ..Params::default()
        },
    }
}

pub fn run(
    kind: SimulateKind,
    p: &Params,
    out: &Path,
    spec: Option<&Path>,
    record: &mut RunRecord,
    outputs: &mut Outputs,
) -> Result<i32> {
    if spec.is_some() && kind != SimulateKind::Convergence {
        return Err(Usage("--spec only applies to simulate convergence".into()).into());
    }
    let (code, result) = match kind {
        SimulateKind::Game => game(p, out, outputs)?,
        SimulateKind::Convergence => convergence(p, out, spec, outputs)?,
        SimulateKind::BmExperiment => bm_experiment(p, out, outputs)?,
        SimulateKind::Counterexample => counterexample(p, out, outputs)?,
        SimulateKind::IsoRoundtrip => iso_roundtrip(p, out, outputs)?,
    };
    record.result = result;
    Ok(code)
}

fn scenario(p: &Params) -> Result<ScenarioSource> {
    let seed = named_seed(p.seed(), "scenario");
    Ok(match p.name(&p.scenario, "uniform") {
        "uniform" => ScenarioSource::Uniform { seed },
        "zero-first-row" => ScenarioSource::ZeroFirstRow { seed },
        "below-g" => ScenarioSource::BelowG {
            g: p.g_table()?,
            default: p.g_default.unwrap_or(0),
            seed,
        },
        "file" => ScenarioSource::FromFile {
            path: p
                .scenario_file
                .clone()
                .ok_or_else(|| Usage("--scenario file needs --scenario-file".into()))?,
        },
        other => return Err(Usage(format!("unknown scenario {other:?}")).into()),
    })
}

/// Rows of the oracle-copy schedule with a nonzero stake.
const ORACLE_ROWS: i64 = 4096;

/// Row `m` stakes `1/(m+1)` of capital, one bet per row, and stops betting
/// after `ORACLE_ROWS` rows.
fn oracle_copy() -> OracleCopy {
    let fractions = (0..ORACLE_ROWS).map(|m| rat(1, m + 1)).collect();
    OracleCopy::new(fractions, rat(0, 1)).expect("fractions lie in [0, 1]")
}

/// The strategy and the row schedule it plays under.
fn strategy(p: &Params) -> Result<(Arc<dyn RowStrategy>, Option<RowSchedule>)> {
    let seed = named_seed(p.seed(), "strategy");
    Ok(match p.name(&p.strategy, "hashed") {
        "all-in-on-zero" => (Arc::new(AllInOnZero), None),
        "zero-stake" => (Arc::new(ZeroStake), None),
        "hashed" => (Arc::new(HashedStrategy { seed, lookback: 2 }), None),
        "oracle-copy" => (Arc::new(oracle_copy()), Some(RowSchedule::constant(1))),
        other => return Err(Usage(format!("unknown strategy {other:?}")).into()),
    })
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

fn game(p: &Params, out: &Path, outputs: &mut Outputs) -> Result<(i32, serde_json::Value)> {
    let (samples, horizon, start) = (p.samples()?, p.horizon()?, p.start_capital()?);
    let scenario = scenario(p)?.open()?;
    let (strategy, schedule) = strategy(p)?;
    let mut config = GameConfig::new(horizon, start.clone());
    config.k_schedule = schedule;
    let mut trajectories = Vec::new();
    let mut finals: Vec<Rational> = Vec::with_capacity(samples);
    for i in 0..samples {
        let r = run_game(strategy.as_ref(), &mut scenario.sample(i as u64), &config)?;
        for (step, v) in r.trajectory.values.iter().enumerate() {
            trajectories.push([i.to_string(), step.to_string(), format_rational(v)]);
        }
        finals.push(r.final_capital().clone());
    }
    outputs.write_csv(&out.join("trajectories.csv"), &["sample", "step", "capital"], trajectories)?;
    outputs.write_csv(
        &out.join("finals.csv"),
        &["sample", "final_capital", "final_value"],
        finals
            .iter()
            .enumerate()
            .map(|(i, f)| [i.to_string(), format_rational(f), to_f64(f).to_string()]),
    )?;
    let values: Vec<f64> = finals.iter().map(to_f64).collect();
    let (mean, se) = mean_se(&values);
    let zero = Rational::from_integer(0.into());
    let summary = json!({
        "kind": "game",
        "samples": samples,
        "steps": horizon,
        "start_capital": format_rational(&start),
        "min_final": format_rational(finals.iter().min().expect("samples > 0")),
        "max_final": format_rational(finals.iter().max().expect("samples > 0")),
        "mean_final": mean,
        "se_final": se,
        "ruin_fraction": finals.iter().filter(|f| **f == zero).count() as f64 / samples as f64,
    });
    outputs.write_json(&out.join("summary.json"), &summary)?;
    Ok((0, summary))
}

fn convergence(p: &Params, out: &Path, spec: Option<&Path>, outputs: &mut Outputs) -> Result<(i32, serde_json::Value)> {
    let (samples, horizon) = (p.samples()?, p.horizon()?);
    let game = |name: &str, strategy: Arc<dyn RowStrategy>, schedule| -> Result<Box<dyn SampleMartingale>> {
        let mut config = GameConfig::new(horizon, p.start_capital()?);
        config.k_schedule = schedule;
        Ok(Box::new(GameMartingale {
            name: name.into(),
            strategy,
            config,
        }))
    };
    let m: Box<dyn SampleMartingale> = match p.name(&p.martingale, "binary-expansion") {
        "binary-expansion" => Box::new(BinaryExpansion),
        "decaying-product" => Box::new(DecayingProduct),
        "hashed-game" => {
            let seed = named_seed(p.seed(), "strategy");
            game("hashed-game", Arc::new(HashedStrategy { seed, lookback: 2 }), None)?
        }
        "oracle-copy" => game("oracle-copy", Arc::new(oracle_copy()), Some(RowSchedule::constant(1)))?,
        "spec" => {
            let path = spec.ok_or_else(|| Usage("--martingale spec needs --spec".into()))?;
            Box::new(read_json::<MartingaleSpec>(path)?)
        }
        other => return Err(Usage(format!("unknown martingale {other:?}")).into()),
    };
    let opts = ConvergenceOptions {
        epsilon: p.epsilon.unwrap_or(0.1),
        ..ConvergenceOptions::default()
    };
    let scenario = scenario(p)?.open()?;
    let (report, per_sample) = convergence_report(m.as_ref(), &scenario, samples, horizon, &opts)?;
    outputs.write_csv(
        &out.join("samples.csv"),
        &["sample", "initial", "final", "oscillation", "upcrossings"],
        per_sample.iter().map(|s| {
            let ups: Vec<String> = s.upcrossings.iter().map(usize::to_string).collect();
            [
                s.index.to_string(),
                s.initial.to_string(),
                s.final_value.to_string(),
                s.oscillation.to_string(),
                ups.join(";"),
            ]
        }),
    )?;
    let summary = serde_json::to_value(&report)?;
    outputs.write_json(&out.join("summary.json"), &summary)?;
    Ok((0, summary))
}

fn bm_experiment(p: &Params, out: &Path, outputs: &mut Outputs) -> Result<(i32, serde_json::Value)> {
    let (samples, t, dt) = (p.samples()?, p.t()?, p.dt()?);
    let paths = sample_paths(t, dt, named_seed(p.seed(), "paths"), samples)?;
    let t_f = t.to_f64().unwrap_or(f64::NAN);
    let dt_f = dt.to_f64().unwrap_or(f64::NAN);
    let last: Vec<f64> = paths.iter().map(GridPath::last).collect();
    let (w_mean, w_se) = mean_se(&last);
    let w_var = w_se.powi(2) * samples as f64;
    // W_{T/2} against W_T − W_{T/2} when T/2 is a grid time.
    let half = paths[0].index_of(t / Rational64::from_integer(2)).ok();
    let half_cov = half.map(|h| {
        paths
            .iter()
            .map(|w| w.value(h) * (w.last() - w.value(h)))
            .sum::<f64>()
            / samples as f64
    });

    let m: Arc<dyn PathMartingale> = Arc::new(Markov::Exponential);
    let pilot: Vec<f64> = paths
        .iter()
        .take(PILOT)
        .map(|w| m.along(w).map(|v| local_extrema(&v)))
        .collect::<Result<Vec<_>, _>>()?
        .concat();
    // One level on each side of the starting value 1.
    let a = select_nonatom_levels(&pilot, 0.5, 0.9, 1)?[0];
    let b = select_nonatom_levels(&pilot, 1.1, 2.0, 1)?[0];
    let up = ContinuousUpcrossing::new(m.clone(), a, b)?;
    let sv = ContinuousSavings::new(m.clone());
    let mut m_final = Vec::with_capacity(samples);
    let mut up_final = Vec::with_capacity(samples);
    let mut sv_final = Vec::with_capacity(samples);
    let (mut up_stops, mut sv_stops, mut hits) = (0usize, 0usize, 0usize);
    for w in &paths {
        let along = m.along(w)?;
        m_final.push(*along.last().expect("nonempty path"));
        if let HitTime::At(_) = hitting_time(&along, dt_f, 0.0, b) {
            hits += 1;
        }
        up_final.push(up.value(w)?);
        sv_final.push(sv.value(w)?);
        up_stops += up.stops(w)?.len();
        sv_stops += sv.stops(w)?.len();
    }
    let stat = |v: &[f64]| {
        let (mean, se) = mean_se(v);
        json!({ "mean": mean, "se": se })
    };
    let n = samples as f64;
    let summary = json!({
        "kind": "bm-experiment",
        "paths": samples,
        "T": t.to_string(),
        "dt": dt.to_string(),
        "w_T": { "mean": w_mean, "se": w_se, "var": w_var, "expected_var": t_f },
        "half_increment_cov": half_cov,
        "exponential": stat(&m_final),
        "band": { "a": a, "b": b },
        "upcrossing": stat(&up_final),
        "upcrossing_mean_stops": up_stops as f64 / n,
        "savings": stat(&sv_final),
        "savings_mean_stops": sv_stops as f64 / n,
        "hit_b_fraction": hits as f64 / n,
    });
    outputs.write_csv(
        &out.join("paths.csv"),
        &["path", "t", "value"],
        paths.iter().take(PATHS_CSV).enumerate().flat_map(|(i, w)| {
            w.csv_rows()
                .map(move |(t, v)| [i.to_string(), t.to_string(), v.to_string()])
        }),
    )?;
    outputs.write_json(&out.join("summary.json"), &summary)?;
    Ok((0, summary))
}

fn counterexample(p: &Params, out: &Path, outputs: &mut Outputs) -> Result<(i32, serde_json::Value)> {
    let radius = p.radius.unwrap_or(8.0);
    let tol = p.tol.unwrap_or(1e-8);
    if !(tol > 0.0) {
        return Err(Usage("--tol must be positive".into()).into());
    }
    let report = remark_counterexample(radius, tol)?;
    outputs.write_json(&out.join("report.json"), &report)?;
    Ok((0, serde_json::to_value(report)?))
}

fn iso_roundtrip(p: &Params, out: &Path, outputs: &mut Outputs) -> Result<(i32, serde_json::Value)> {
    let samples = p.samples()?;
    let t = p.t()?;
    if !t.is_integer() {
        return Err(Usage("iso-roundtrip needs an integer --T (the number of rows)".into()).into());
    }
    let rows = *t.numer() as u64;
    let (depth, q) = (p.depth.unwrap_or(3), p.qbits.unwrap_or(8));
    let cols = 1u64
        .checked_shl(depth)
        .and_then(|c| c.checked_mul(u64::from(q)))
        .ok_or_else(|| Usage("--depth too large".into()))?;
    let arrays = ScenarioSource::uniform(named_seed(p.seed(), "arrays")).open()?;
    let mut exact = 0usize;
    let mut w1 = Vec::with_capacity(samples);
    let mut first = None;
    for i in 0..samples as u64 {
        let mut bits = arrays.sample(i);
        let omega: BitAssignment = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| Position::new(r, c)))
            .map(|pos| (pos, bits.bit(pos)))
            .collect();
        let w = bits_to_path(&omega, rows, depth, q)?;
        if path_to_bits(&w, rows, depth, q)? == omega {
            exact += 1;
        }
        w1.push(w.at(1.0));
        first.get_or_insert(w);
    }
    let (mean, se) = mean_se(&w1);
    let summary = json!({
        "kind": "iso-roundtrip",
        "arrays": samples,
        "rows": rows,
        "depth": depth,
        "qbits": q,
        "round_trips_exact": exact,
        "w_1": { "mean": mean, "se": se, "var": se.powi(2) * samples as f64 },
    });
    if let Some(w) = first {
        outputs.write_csv(
            &out.join("path.csv"),
            &["t", "value"],
            w.csv_rows().map(|(t, v)| [t.to_string(), v.to_string()]),
        )?;
    }
    outputs.write_json(&out.join("summary.json"), &summary)?;
    Ok((if exact == samples { 0 } else { 1 }, summary))
}
