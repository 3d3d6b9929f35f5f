//! Monte Carlo conditional expectation `E_t(f)(W) = E[f(W_{≤t} ⌢ V)]` over
//! fresh Brownian continuations `V`.

use super::path::{grid_steps, sample_path_with, GridPath};
use super::BrownianError;
use crate::rng::substream;
use num::rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Confidence level of every reported half-width.
pub const DELTA: f64 = 0.05;

/// A path functional with a declared bound `|f| ≤ C`.
pub trait PathFunctional: Sync {
    /// `C`, or `None` for an unbounded functional.
    fn bound(&self) -> Option<f64>;

    /// Evaluated on a path over `[0, horizon]`.
    fn eval(&self, w: &GridPath) -> f64;
}

/// `max(min(W_T, C), -C)` at the end of the path.
#[derive(Debug, Clone, Copy)]
pub struct ClampedTerminal(pub f64);

impl PathFunctional for ClampedTerminal {
    fn bound(&self) -> Option<f64> {
        Some(self.0)
    }

    fn eval(&self, w: &GridPath) -> f64 {
        w.last().clamp(-self.0, self.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantFunctional(pub f64);

impl PathFunctional for ConstantFunctional {
    fn bound(&self) -> Option<f64> {
        Some(self.0.abs())
    }

    fn eval(&self, _: &GridPath) -> f64 {
        self.0
    }
}

/// A closure with a stated bound.
#[derive(Clone)]
pub struct FnFunctional {
    pub bound: Option<f64>,
    pub f: Arc<dyn Fn(&GridPath) -> f64 + Send + Sync>,
}

impl PathFunctional for FnFunctional {
    fn bound(&self) -> Option<f64> {
        self.bound
    }

    fn eval(&self, w: &GridPath) -> f64 {
        (self.f)(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    /// Hoeffding half-width `C·sqrt(2 ln(2/δ) / n)` at `δ = 0.05`.
    pub half_width: f64,
    pub samples: usize,
}

pub fn hoeffding_half_width(bound: f64, n: usize) -> f64 {
    bound * (2.0 * (2.0 / DELTA).ln() / n as f64).sqrt()
}

/// Estimates `E_t(f)` on `prefix` (a path up to `t`), continuing it to
/// `horizon`.
pub fn cond_expectation_t(
    f: &dyn PathFunctional,
    t: Rational64,
    prefix: &GridPath,
    horizon: Rational64,
    n_samples: usize,
    seed: u64,
) -> Result<Estimate, BrownianError> {
    let c = f
        .bound()
        .filter(|c| c.is_finite() && *c >= 0.0)
        .ok_or(BrownianError::Unbounded)?;
    if n_samples == 0 {
        return Err(BrownianError::NoSamples);
    }
    if horizon < t {
        return Err(BrownianError::HorizonBeforeTime);
    }
    let head = prefix.prefix(t)?;
    let steps = grid_steps(horizon - t, prefix.dt())?;
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let v = sample_path_with(steps, prefix.dt(), &mut substream(seed, i));
            let w = head.concat(t, &v).expect("same grid");
            f.eval(&w)
        })
        .collect();
    let estimate = values.iter().sum::<f64>() / n_samples as f64;
    Ok(Estimate {
        estimate,
        half_width: hoeffding_half_width(c, n_samples),
        samples: n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::path::sample_path;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn constant_functional() {
        let w = GridPath::origin(r(1, 8));
        let e = cond_expectation_t(&ConstantFunctional(3.0), r(0, 1), &w, r(1, 1), 100, 1).unwrap();
        assert_eq!(e.estimate, 3.0);
        assert!((e.half_width - 3.0 * (2.0 * 40f64.ln() / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clamped_terminal_tracks_prefix() {
        let w = sample_path(r(1, 2), r(1, 32), 3).unwrap();
        let e = cond_expectation_t(&ClampedTerminal(6.0), r(1, 2), &w, r(1, 1), 20_000, 4).unwrap();
        assert!((e.estimate - w.last()).abs() < e.half_width);
    }

    #[test]
    fn unbounded_functionals_are_rejected() {
        let f = FnFunctional {
            bound: None,
            f: Arc::new(|w: &GridPath| w.last()),
        };
        let w = GridPath::origin(r(1, 8));
        assert!(matches!(
            cond_expectation_t(&f, r(0, 1), &w, r(1, 1), 10, 0),
            Err(BrownianError::Unbounded)
        ));
    }
}
