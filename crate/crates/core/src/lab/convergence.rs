//! Monte Carlo diagnostics for Doob's convergence theorem. Divergence cannot
//! be decided from a finite run, so the report only describes how much the
//! capital still moves late in the run and how often it crosses fixed bands.

use super::game::{run_game, GameConfig, RowStrategy};
use super::source::{BitSource, Scenario};
use super::LabError;
use crate::bitspace::Position;
use crate::martingale::{crossing_times, MartingaleSpec, Trajectory};
use crate::rational::{to_f64, Rational};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Completed upcrossings of `[a, b]`: passages from a value `<= a` to a
/// later value `>= b`.
pub fn count_upcrossings(t: &Trajectory, a: &Rational, b: &Rational) -> Result<usize, LabError> {
    if a >= b {
        return Err(LabError::EmptyBand);
    }
    Ok(crossing_times(&t.values, a, b).upcrossings(&t.values, a))
}

/// A martingale that can be sampled path by path.
pub trait SampleMartingale: Sync {
    fn name(&self) -> String;

    /// Values at steps `0..=horizon` on the sample read from `bits`.
    fn sample_path(&self, bits: &mut dyn BitSource, horizon: usize) -> Result<Vec<f64>, LabError>;
}

impl SampleMartingale for MartingaleSpec {
    fn name(&self) -> String {
        "spec".into()
    }

    fn sample_path(&self, bits: &mut dyn BitSource, horizon: usize) -> Result<Vec<f64>, LabError> {
        if horizon >= self.levels.len() {
            return Err(LabError::HorizonTooLong {
                horizon,
                available: self.levels.len().saturating_sub(1),
            });
        }
        Ok(self.levels[..=horizon]
            .iter()
            .map(|f| to_f64(f.eval_with(|p| bits.bit(p))))
            .collect())
    }
}

/// `M_n = E_n(Σ ω_{i,0} 2^{-(i+1)})`: the running binary expansion of a
/// uniform number, with the unread tail averaged out.
#[derive(Debug, Clone, Copy, Default)]
pub struct BinaryExpansion;

impl SampleMartingale for BinaryExpansion {
    fn name(&self) -> String {
        "binary-expansion".into()
    }

    fn sample_path(&self, bits: &mut dyn BitSource, horizon: usize) -> Result<Vec<f64>, LabError> {
        let mut out = Vec::with_capacity(horizon + 1);
        let mut sum = 0.0;
        let mut w = 0.5;
        out.push(0.5);
        for i in 0..horizon {
            if bits.bit(Position::new(i as u64, 0)) {
                sum += w;
            }
            w /= 2.0;
            out.push(sum + w);
        }
        Ok(out)
    }
}

/// `M_{n+1} = M_n (1 ± c_n)` on bit `(n, 0)`, with `c_n = 2^{-(1 + ⌊n/16⌋)}`.
/// The stakes are square-summable, so the martingale is bounded in L².
#[derive(Debug, Clone, Copy, Default)]
pub struct DecayingProduct;

impl DecayingProduct {
    pub fn stake(n: usize) -> f64 {
        0.5f64.powi(1 + (n / 16) as i32)
    }
}

impl SampleMartingale for DecayingProduct {
    fn name(&self) -> String {
        "decaying-product".into()
    }

    fn sample_path(&self, bits: &mut dyn BitSource, horizon: usize) -> Result<Vec<f64>, LabError> {
        let mut out = Vec::with_capacity(horizon + 1);
        let mut m = 1.0;
        out.push(m);
        for n in 0..horizon {
            let c = Self::stake(n);
            m *= if bits.bit(Position::new(n as u64, 0)) { 1.0 + c } else { 1.0 - c };
            out.push(m);
        }
        Ok(out)
    }
}

/// Capital of a game strategy, one value per decision.
#[derive(Clone)]
pub struct GameMartingale {
    pub name: String,
    pub strategy: Arc<dyn RowStrategy>,
    pub config: GameConfig,
}

impl SampleMartingale for GameMartingale {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn sample_path(&self, bits: &mut dyn BitSource, horizon: usize) -> Result<Vec<f64>, LabError> {
        let mut config = self.config.clone();
        config.steps = horizon;
        config.stop_row = None;
        let record = run_game(self.strategy.as_ref(), bits, &config)?;
        let mut values: Vec<f64> = record.trajectory.values.iter().map(to_f64).collect();
        // A stop before `horizon` freezes the capital.
        let last = *values.last().expect("nonempty");
        values.resize(horizon + 1, last);
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceOptions {
    pub epsilon: f64,
    /// Bands `[a, b]` whose upcrossings are counted.
    pub ladder: Vec<(f64, f64)>,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            epsilon: 0.1,
            ladder: vec![(0.25, 0.75), (0.5, 1.5), (1.0, 2.0), (2.0, 4.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub index: u64,
    pub initial: f64,
    pub final_value: f64,
    /// `max - min` over the last quarter of the run.
    pub oscillation: f64,
    /// Upcrossings per ladder band.
    pub upcrossings: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderStat {
    pub a: f64,
    pub b: f64,
    pub mean: f64,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub martingale: String,
    pub samples: usize,
    pub horizon: usize,
    pub epsilon: f64,
    pub mean_initial: f64,
    pub mean_final: f64,
    /// Standard error of `mean_final`.
    pub se_final: f64,
    pub mean_oscillation: f64,
    /// Fraction of samples with oscillation above `epsilon`.
    pub oscillation_fraction: f64,
    pub ruin_fraction: f64,
    pub ladder: Vec<LadderStat>,
}

fn summarize(index: u64, path: &[f64], opts: &ConvergenceOptions) -> Result<SampleSummary, LabError> {
    if let Some(step) = path.iter().position(|v| *v < 0.0) {
        return Err(LabError::NegativeCapitalAt { sample: index, step });
    }
    let h = path.len() - 1;
    let tail = &path[h - h / 4..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(SampleSummary {
        index,
        initial: path[0],
        final_value: path[h],
        oscillation: hi - lo,
        upcrossings: opts
            .ladder
            .iter()
            .map(|(a, b)| crossing_times(path, a, b).upcrossings(path, a))
            .collect(),
    })
}

/// Runs `samples` independent paths to `horizon` and summarizes them.
/// Sample `i` reads the bits of `scenario.sample(i)`, so results do not
/// depend on the thread count.
pub fn convergence_report(
    m: &dyn SampleMartingale,
    scenario: &Scenario,
    samples: usize,
    horizon: usize,
    opts: &ConvergenceOptions,
) -> Result<(ConvergenceReport, Vec<SampleSummary>), LabError> {
    if samples == 0 {
        return Err(LabError::NoSamples);
    }
    if horizon == 0 {
        return Err(LabError::NoSteps);
    }
    if opts.ladder.iter().any(|(a, b)| a >= b) {
        return Err(LabError::EmptyBand);
    }
    let per_sample: Vec<SampleSummary> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut bits = scenario.sample(i);
            let path = m.sample_path(&mut bits, horizon)?;
            summarize(i, &path, opts)
        })
        .collect::<Result<_, _>>()?;
    let n = samples as f64;
    let mean = |f: &dyn Fn(&SampleSummary) -> f64| per_sample.iter().map(f).sum::<f64>() / n;
    let mean_final = mean(&|s| s.final_value);
    let var = per_sample
        .iter()
        .map(|s| (s.final_value - mean_final).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let report = ConvergenceReport {
        martingale: m.name(),
        samples,
        horizon,
        epsilon: opts.epsilon,
        mean_initial: mean(&|s| s.initial),
        mean_final,
        se_final: (var / n).sqrt(),
        mean_oscillation: mean(&|s| s.oscillation),
        oscillation_fraction: mean(&|s| f64::from(u8::from(s.oscillation > opts.epsilon))),
        ruin_fraction: mean(&|s| f64::from(u8::from(s.final_value == 0.0))),
        ladder: opts
            .ladder
            .iter()
            .enumerate()
            .map(|(j, &(a, b))| LadderStat {
                a,
                b,
                mean: mean(&|s| s.upcrossings[j] as f64),
                max: per_sample.iter().map(|s| s.upcrossings[j]).max().unwrap_or(0),
            })
            .collect(),
    };
    Ok((report, per_sample))
}
