//! Parameter resolution: flags, then the `--config` TOML file, then
//! `DOOB_SEED` for the seed, then per-command defaults.

use crate::Usage;
use anyhow::Result;
use clap::Args;
use doob_core::rational::{parse_rational, Rational};
use num::rational::Rational64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const SEED_ENV: &str = "DOOB_SEED";

/// Every tunable parameter. All fields are optional so that the sources can
/// be layered; the TOML keys are the flag names.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Root seed. Falls back to the config file, then DOOB_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of samples, paths or arrays.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Materialization horizon, or the number of steps for simulations.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Largest support a materialized level may have.
    #[arg(long, global = true)]
    pub support_cap: Option<usize>,
    /// Brownian grid step, as "p/q".
    #[arg(long, global = true)]
    pub dt: Option<String>,
    /// Brownian time horizon, as "p/q". For iso-roundtrip, the number of rows.
    #[arg(long = "T", global = true)]
    #[serde(rename = "T")]
    pub t: Option<String>,
    /// Lévy–Ciesielski depth L.
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Bits per Gaussian coefficient q.
    #[arg(long, global = true)]
    pub qbits: Option<u32>,
    /// Truncation radius R of the counterexample integral.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Quadrature tolerance of the counterexample integral.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Oscillation threshold for convergence diagnostics.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// uniform, zero-first-row, below-g or file.
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    /// Bit matrix for --scenario file.
    #[arg(long, global = true)]
    pub scenario_file: Option<PathBuf>,
    /// Row bounds for --scenario below-g, as "row=cols,row=cols".
    #[arg(long, global = true)]
    pub g: Option<String>,
    /// Bound for rows missing from --g.
    #[arg(long, global = true)]
    pub g_default: Option<u64>,
    /// all-in-on-zero, zero-stake, hashed or oracle-copy.
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    /// binary-expansion, decaying-product, hashed-game, oracle-copy or spec.
    #[arg(long, global = true)]
    pub martingale: Option<String>,
    /// Initial capital, as "p/q".
    #[arg(long, global = true)]
    pub start_capital: Option<String>,
}

macro_rules! layer {
    ($a:expr, $b:expr, $($f:ident),*) => {
        Params { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Params {
    /// Fields of `self`, with the gaps filled from `other`.
    pub fn or(self, other: Params) -> Params {
        layer!(
            self, other, seed, samples, horizon, support_cap, dt, t, depth, qbits, radius, tol, epsilon,
            scenario, scenario_file, g, g_default, strategy, martingale, start_capital
        )
    }

    /// The resolved values as JSON, without unset fields.
    pub fn snapshot(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("params serialize");
        if let serde_json::Value::Object(m) = &mut v {
            m.retain(|_, x| !x.is_null());
        }
        v
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn samples(&self) -> Result<usize> {
        positive("samples", self.samples)
    }

    pub fn horizon(&self) -> Result<usize> {
        positive("horizon", self.horizon)
    }

    pub fn support_cap(&self) -> Result<usize> {
        positive("support-cap", self.support_cap)
    }

    pub fn dt(&self) -> Result<Rational64> {
        positive_ratio("dt", self.dt.as_deref())
    }

    pub fn t(&self) -> Result<Rational64> {
        positive_ratio("T", self.t.as_deref())
    }

    pub fn start_capital(&self) -> Result<Rational> {
        let s = self.start_capital.as_deref().unwrap_or("1");
        let r = parse_rational(s).map_err(|e| Usage(format!("--start-capital: {e}")))?;
        if r < Rational::from_integer(0.into()) {
            return Err(Usage("--start-capital must be nonnegative".into()).into());
        }
        Ok(r)
    }

    pub fn g_table(&self) -> Result<BTreeMap<u64, u64>> {
        let mut out = BTreeMap::new();
        for item in self.g.as_deref().unwrap_or("").split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let parsed = item
                .split_once('=')
                .and_then(|(r, c)| Some((r.trim().parse().ok()?, c.trim().parse().ok()?)));
            let (row, cols) = parsed.ok_or_else(|| Usage(format!("--g: expected row=cols, got {item:?}")))?;
            out.insert(row, cols);
        }
        Ok(out)
    }

    pub fn name<'a>(&'a self, field: &'a Option<String>, default: &'a str) -> &'a str {
        field.as_deref().unwrap_or(default)
    }
}

fn positive<T: PartialOrd + Default + Copy>(name: &str, v: Option<T>) -> Result<T> {
    match v {
        Some(x) if x > T::default() => Ok(x),
        Some(_) => Err(Usage(format!("--{name} must be positive")).into()),
        None => Err(Usage(format!("--{name} is required")).into()),
    }
}

fn positive_ratio(name: &str, s: Option<&str>) -> Result<Rational64> {
    let s = s.ok_or_else(|| Usage(format!("--{name} is required")))?;
    let r: Rational64 = s
        .trim()
        .parse()
        .map_err(|_| Usage(format!("--{name}: expected p/q, got {s:?}")))?;
    if r <= Rational64::from_integer(0) {
        return Err(Usage(format!("--{name} must be positive")).into());
    }
    Ok(r)
}

/// Reads a TOML config file; syntax errors carry their line and column.
pub fn read_file(path: &Path) -> Result<Params> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())).into())
}

/// Layers flags over the config file over `DOOB_SEED` over `defaults`.
pub fn resolve(flags: &Params, file: Option<&Path>, defaults: Params) -> Result<Params> {
    let from_file = file.map(read_file).transpose()?.unwrap_or_default();
    let mut p = flags.clone().or(from_file);
    if p.seed.is_none() {
        if let Ok(s) = std::env::var(SEED_ENV) {
            let seed = s
                .trim()
                .parse()
                .map_err(|_| Usage(format!("{SEED_ENV}: expected an unsigned integer, got {s:?}")))?;
            p.seed = Some(seed);
        }
    }
    let mut p = p.or(defaults);
    p.seed = Some(p.seed());
    Ok(p)
}
