#![allow(dead_code)]

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// M_0 = 1/2, M_1 = ω_{0,0}.
pub const FAIR_BIT: &str = r#"{"chain":"rows","levels":[
  {"support":[],"table":["1/2"]},
  {"support":[[0,0]],"table":["0","1"]}],"nonneg":true}"#;

/// M_0 = 1/2, M_1 = ω_{0,0} + 1.
pub const SHIFTED_BIT: &str = r#"{"chain":"rows","levels":[
  {"support":[],"table":["1/2"]},
  {"support":[[0,0]],"table":["1","2"]}],"nonneg":true}"#;

/// Capital of the gambler who doubles on each 1-bit of column 0.
pub const DOUBLING: &str = r#"{"chain":"rows","levels":[
  {"support":[],"table":["1"]},
  {"support":[[0,0]],"table":["0","2"]},
  {"support":[[0,0],[1,0]],"table":["0","0","0","4"]},
  {"support":[[0,0],[1,0],[2,0]],"table":["0","0","0","0","0","0","0","8"]}],"nonneg":true}"#;

pub fn doob_lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doob-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("DOOB_SEED")
        .output()
        .expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

/// `(path, sha256)` of every output listed in a run record, with paths made
/// relative to `base` so that two runs in different directories compare.
pub fn digests(record: &Value, base: &str) -> Vec<(String, String)> {
    record["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| {
            let p = o["path"].as_str().unwrap();
            (p.strip_prefix(base).unwrap_or(p).to_string(), o["sha256"].as_str().unwrap().to_string())
        })
        .collect()
}

/// Every CLI command that writes files, with small parameters. `{out}`
/// stands for the output location and `{spec}` for the doubling spec.
pub const DETERMINISM_RUNS: &[&[&str]] = &[
    &["transform", "repair", "--spec", "{spec}", "--out", "{out}/r.json"],
    &["transform", "upcross", "--spec", "{spec}", "--out", "{out}/u.json", "--a", "1/2", "--b", "3", "--sample", "1,1,1"],
    &["transform", "savings", "--spec", "{spec}", "--out", "{out}/s.json", "--sample", "1,1,0"],
    &["transform", "extend", "--spec", "{spec}", "--out", "{out}/e.json"],
    &["verify", "--spec", "{spec}", "--out", "{out}/v.json"],
    &["simulate", "game", "--samples", "50", "--horizon", "12", "--out", "{out}/game"],
    &["simulate", "convergence", "--samples", "200", "--horizon", "32", "--martingale", "hashed-game", "--out", "{out}/conv"],
    &["simulate", "bm-experiment", "--samples", "300", "--dt", "1/128", "--out", "{out}/bm"],
    &["simulate", "counterexample", "--out", "{out}/cx"],
    &["simulate", "iso-roundtrip", "--samples", "50", "--depth", "4", "--qbits", "4", "--T", "2", "--out", "{out}/iso"],
];

/// Runs every command of `DETERMINISM_RUNS` under `seed` into `out` and
/// returns the digests of their outputs.
pub fn run_all(dir: &Path, out: &str, seed: &str) -> Vec<(String, String)> {
    let spec = dir.join("doubling.json");
    std::fs::write(&spec, DOUBLING).unwrap();
    let spec = spec.display().to_string();
    let mut all = Vec::new();
    for run in DETERMINISM_RUNS {
        let mut args: Vec<String> = run
            .iter()
            .map(|a| a.replace("{out}", out).replace("{spec}", &spec))
            .collect();
        args.extend(["--seed".to_string(), seed.to_string()]);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = doob_lab(&refs, dir);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let record_path = match run[0] {
            "simulate" => format!("{}/run.json", args[args.iter().position(|a| a == "--out").unwrap() + 1]),
            _ => format!("{}.run.json", args[args.iter().position(|a| a == "--out").unwrap() + 1]),
        };
        all.extend(digests(&json(&dir.join(record_path)), out));
    }
    all
}
