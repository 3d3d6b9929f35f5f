use super::BrownianError;
use crate::rng::substream;
use num::rational::Rational64;
use num::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A piecewise-linear path on the grid `0, dt, 2dt, …`.
///
/// Values are stored as `raw[i] - base`. Splitting keeps the raw numbers and
/// moves the base, so splitting a path and concatenating the pieces again
/// reproduces it bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    dt: Rational64,
    raw: Vec<f64>,
    base: f64,
}

fn to_f64(r: Rational64) -> f64 {
    r.to_f64().expect("grid times fit in f64")
}

impl GridPath {
    pub fn new(dt: Rational64, values: Vec<f64>) -> Result<Self, BrownianError> {
        if dt <= Rational64::zero() {
            return Err(BrownianError::BadStep);
        }
        if values.is_empty() {
            return Err(BrownianError::EmptyPath);
        }
        Ok(GridPath {
            dt,
            raw: values,
            base: 0.0,
        })
    }

    /// The one-point path at 0.
    pub fn origin(dt: Rational64) -> Self {
        GridPath {
            dt,
            raw: vec![0.0],
            base: 0.0,
        }
    }

    pub fn dt(&self) -> Rational64 {
        self.dt
    }

    pub fn dt_f64(&self) -> f64 {
        to_f64(self.dt)
    }

    /// Number of grid steps (one less than the number of points).
    pub fn steps(&self) -> usize {
        self.raw.len() - 1
    }

    pub fn horizon(&self) -> Rational64 {
        self.dt * Rational64::from_integer(self.steps() as i64)
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt_f64()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.raw[i] - self.base
    }

    pub fn last(&self) -> f64 {
        self.value(self.steps())
    }

    pub fn values(&self) -> Vec<f64> {
        self.raw.iter().map(|r| r - self.base).collect()
    }

    pub fn origin_zero(&self) -> bool {
        self.value(0) == 0.0
    }

    /// Value at time `t` by linear interpolation, clamped to the horizon.
    pub fn at(&self, t: f64) -> f64 {
        let x = (t / self.dt_f64()).max(0.0);
        let i = (x.floor() as usize).min(self.steps());
        if i == self.steps() {
            return self.last();
        }
        let w = x - i as f64;
        self.value(i) * (1.0 - w) + self.value(i + 1) * w
    }

    /// Grid index of time `s`.
    pub fn index_of(&self, s: Rational64) -> Result<usize, BrownianError> {
        let k = s / self.dt;
        if !k.is_integer() || k < Rational64::zero() || k.to_integer() as usize > self.steps() {
            return Err(BrownianError::OffGrid {
                time: to_f64(s),
                dt: self.dt_f64(),
            });
        }
        Ok(k.to_integer() as usize)
    }

    /// `W_{≤s}`.
    pub fn prefix(&self, s: Rational64) -> Result<GridPath, BrownianError> {
        let k = self.index_of(s)?;
        Ok(self.prefix_steps(k))
    }

    pub(crate) fn prefix_steps(&self, k: usize) -> GridPath {
        GridPath {
            dt: self.dt,
            raw: self.raw[..=k].to_vec(),
            base: self.base,
        }
    }

    /// `(W_{≤s}, W_{≥s})` with the tail restarted at 0.
    pub fn split(&self, s: Rational64) -> Result<(GridPath, GridPath), BrownianError> {
        let k = self.index_of(s)?;
        let tail = GridPath {
            dt: self.dt,
            raw: self.raw[k..].to_vec(),
            base: self.raw[k],
        };
        Ok((self.prefix_steps(k), tail))
    }

    /// `(W ⌢_s V)_t = W_t` for `t ≤ s` and `W_s + V_{t-s}` after.
    pub fn concat(&self, s: Rational64, v: &GridPath) -> Result<GridPath, BrownianError> {
        if v.dt != self.dt {
            return Err(BrownianError::StepMismatch);
        }
        if !v.origin_zero() {
            return Err(BrownianError::NotFromOrigin);
        }
        let k = self.index_of(s)?;
        let shift = self.raw[k] - v.raw[0];
        let mut raw = self.raw[..=k].to_vec();
        raw.extend(v.raw[1..].iter().map(|x| x + shift));
        Ok(GridPath {
            dt: self.dt,
            raw,
            base: self.base,
        })
    }

    /// Rows of `(t, value)` for CSV output.
    pub fn csv_rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.raw.len()).map(|i| (self.time(i), self.value(i)))
    }
}

/// Number of grid steps in `[0, t]`.
pub fn grid_steps(t: Rational64, dt: Rational64) -> Result<usize, BrownianError> {
    if dt <= Rational64::zero() {
        return Err(BrownianError::BadStep);
    }
    let k = t / dt;
    if !k.is_integer() || k < Rational64::zero() {
        return Err(BrownianError::OffGrid {
            time: to_f64(t),
            dt: to_f64(dt),
        });
    }
    Ok(k.to_integer() as usize)
}

/// A Brownian path on `[0, steps·dt]` drawn from `rng`.
pub fn sample_path_with<R: Rng + ?Sized>(steps: usize, dt: Rational64, rng: &mut R) -> GridPath {
    let sd = to_f64(dt).sqrt();
    let mut raw = Vec::with_capacity(steps + 1);
    let mut w = 0.0;
    raw.push(w);
    for _ in 0..steps {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        raw.push(w);
    }
    GridPath { dt, raw, base: 0.0 }
}

/// Brownian path on `[0, t]`; `t` must be a multiple of `dt`.
pub fn sample_path(t: Rational64, dt: Rational64, seed: u64) -> Result<GridPath, BrownianError> {
    let steps = grid_steps(t, dt)?;
    Ok(sample_path_with(steps, dt, &mut substream(seed, 0)))
}

/// `n` independent paths; path `i` uses substream `i` of `seed`.
pub fn sample_paths(
    t: Rational64,
    dt: Rational64,
    seed: u64,
    n: usize,
) -> Result<Vec<GridPath>, BrownianError> {
    let steps = grid_steps(t, dt)?;
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| sample_path_with(steps, dt, &mut substream(seed, i)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn concat_linear_ramps() {
        let ramp = GridPath::new(r(1, 1), vec![0.0, 1.0]).unwrap();
        let out = ramp.concat(r(1, 1), &ramp).unwrap();
        assert_eq!(out.values(), vec![0.0, 1.0, 2.0]);
        let from_zero = GridPath::origin(r(1, 1)).concat(r(0, 1), &ramp).unwrap();
        assert_eq!(from_zero, ramp);
    }

    #[test]
    fn split_then_concat_is_exact() {
        let w = sample_path(r(2, 1), r(1, 64), 5).unwrap();
        for k in [0, 1, 37, 64, 128] {
            let s = r(k, 64);
            let (head, tail) = w.split(s).unwrap();
            assert!(tail.origin_zero());
            let back = head.concat(s, &tail).unwrap();
            assert_eq!(back.values(), w.values());
        }
    }

    #[test]
    fn off_grid_times_are_rejected() {
        let w = sample_path(r(1, 1), r(1, 4), 1).unwrap();
        assert!(w.split(r(1, 3)).is_err());
        assert!(w.split(r(2, 1)).is_err());
        assert!(sample_path(r(1, 1), r(1, 3), 1).is_ok());
        assert!(sample_path(r(1, 2), r(1, 3), 1).is_err());
    }

    #[test]
    fn single_step_path() {
        let w = sample_path(r(1, 1), r(1, 1), 9).unwrap();
        assert_eq!(w.steps(), 1);
        assert_eq!(w.value(0), 0.0);
        assert!(w.last().is_finite());
        assert_eq!(w.at(0.5), w.last() / 2.0);
    }
}
