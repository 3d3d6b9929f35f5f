//! Martingales of a Brownian path, the continuous-time upcrossing and
//! savings transforms, and the extension from a time grid to all times.

use super::hitting::{hitting_time, HitTime};
use super::mc::{cond_expectation_t, Estimate, PathFunctional};
use super::normal::phi;
use super::path::GridPath;
use super::BrownianError;
use crate::martingale::StopKind;
use num::rational::Rational64;
use num::{ToPrimitive, Zero};
use serde::Serialize;
use std::sync::Arc;

/// A martingale `M_t(W)` that reads only `W_{≤t}`.
pub trait PathMartingale: Send + Sync {
    /// `M` at every grid time of `w`. Entry `i` may depend only on the
    /// first `i + 1` values of `w`.
    fn along(&self, w: &GridPath) -> Result<Vec<f64>, BrownianError>;

    /// `M_t(W)` at `t = prefix.horizon()`.
    fn value(&self, prefix: &GridPath) -> Result<f64, BrownianError> {
        Ok(*self.along(prefix)?.last().expect("paths are nonempty"))
    }

    /// A bound on `|M_t|`, if one is known.
    fn bound(&self, _t: f64) -> Option<f64> {
        None
    }
}

/// Martingales of the form `f(t, W_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Markov {
    Constant { value: f64 },
    /// `W_t`.
    Brownian,
    /// `exp(W_t − t/2)`.
    Exponential,
    /// `e^{t/2} cos W_t`.
    Cosine,
    /// `P(W_T > level | W_t) = Φ((W_t − level)/√(T − t))`, frozen after `T`.
    Digital { level: f64, maturity: f64 },
}

impl Markov {
    pub fn at(&self, t: f64, x: f64) -> f64 {
        match *self {
            Markov::Constant { value } => value,
            Markov::Brownian => x,
            Markov::Exponential => (x - 0.5 * t).exp(),
            Markov::Cosine => (0.5 * t).exp() * x.cos(),
            Markov::Digital { level, maturity } => {
                if t < maturity {
                    phi((x - level) / (maturity - t).sqrt())
                } else if x > level {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl PathMartingale for Markov {
    fn along(&self, w: &GridPath) -> Result<Vec<f64>, BrownianError> {
        Ok(w.csv_rows().map(|(t, x)| self.at(t, x)).collect())
    }

    fn bound(&self, t: f64) -> Option<f64> {
        match *self {
            Markov::Constant { value } => Some(value.abs()),
            Markov::Brownian | Markov::Exponential => None,
            Markov::Cosine => Some((0.5 * t).exp()),
            Markov::Digital { .. } => Some(1.0),
        }
    }
}

/// A stopping time reached along a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousStop {
    pub kind: StopKind,
    pub k: usize,
    /// The hitting time itself.
    pub time: f64,
    /// First grid index at or after `time`, where the transform switches.
    pub step: usize,
}

/// First grid index at or after time `e`.
fn grid_index_at_or_after(e: f64, dt: f64) -> usize {
    let j = (e / dt).ceil();
    // Absorb rounding when `e` is a grid time computed as `i·dt`.
    if j > 0.0 && (j - 1.0) * dt >= e {
        (j - 1.0) as usize
    } else {
        j as usize
    }
}

/// The upcrossing transform observed on the grid of `m` (linearly
/// interpolated). `σ^down_k` and `σ^up_{k+1}` are the first times after the
/// previous stop at which `M` equals `b` and `a`; the transform switches
/// phase at the first grid time at or after each of them, which keeps it a
/// martingale on the grid.
pub fn continuous_upcrossing_path(
    m: &[f64],
    dt: f64,
    a: f64,
    b: f64,
) -> Result<(Vec<f64>, Vec<ContinuousStop>), BrownianError> {
    if !(a < b) {
        return Err(BrownianError::EmptyBand);
    }
    if m.is_empty() {
        return Err(BrownianError::EmptyPath);
    }
    let mut out = Vec::with_capacity(m.len());
    let mut stops = Vec::new();
    let (mut m_anchor, mut n_anchor) = (m[0], m[0]);
    let mut rising = true;
    let mut start = 0.0;
    let mut k = 0;
    loop {
        let level = if rising { b } else { a };
        let hit = hitting_time(m, dt, start, level);
        let switch = hit.time().map_or(m.len(), |e| grid_index_at_or_after(e, dt).max(out.len()));
        while out.len() < m.len() && out.len() <= switch {
            let i = out.len();
            out.push(if rising { m[i] - m_anchor + n_anchor } else { n_anchor });
        }
        let HitTime::At(e) = hit else { break };
        let value = m[switch.min(m.len() - 1)];
        if rising {
            stops.push(ContinuousStop {
                kind: StopKind::Down,
                k,
                time: e,
                step: switch,
            });
            n_anchor += value - m_anchor;
        } else {
            k += 1;
            stops.push(ContinuousStop {
                kind: StopKind::Up,
                k,
                time: e,
                step: switch,
            });
            m_anchor = value;
        }
        rising = !rising;
        start = e;
    }
    Ok((out, stops))
}

/// The savings transform observed on the grid of `m`:
/// `N_t = ½N_τ(1 + M_t/M_τ)` with `τ_{k+1}` the first time after `τ_k` at
/// which `M = 2M_{τ_k}`, taken at the first grid time at or after it.
pub fn continuous_savings_path(m: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<ContinuousStop>), BrownianError> {
    let Some(&m0) = m.first() else {
        return Err(BrownianError::EmptyPath);
    };
    if !(m0 > 0.0) {
        return Err(BrownianError::ZeroAtDoubling(m0));
    }
    let mut out = Vec::with_capacity(m.len());
    let mut stops = Vec::new();
    let (mut m_tau, mut n_tau) = (m0, m0);
    let mut start = 0.0;
    let mut k = 0;
    loop {
        let hit = hitting_time(m, dt, start, 2.0 * m_tau);
        let switch = hit.time().map_or(m.len(), |e| grid_index_at_or_after(e, dt).max(out.len()));
        while out.len() < m.len() && out.len() <= switch {
            let i = out.len();
            out.push(0.5 * n_tau * (1.0 + m[i] / m_tau));
        }
        let HitTime::At(e) = hit else { break };
        k += 1;
        stops.push(ContinuousStop {
            kind: StopKind::Doubling,
            k,
            time: e,
            step: switch,
        });
        let j = switch.min(m.len() - 1);
        n_tau = out[j];
        m_tau = m[j];
        start = e;
    }
    Ok((out, stops))
}

#[derive(Clone)]
pub struct ContinuousUpcrossing {
    inner: Arc<dyn PathMartingale>,
    a: f64,
    b: f64,
}

impl ContinuousUpcrossing {
    pub fn new(inner: Arc<dyn PathMartingale>, a: f64, b: f64) -> Result<Self, BrownianError> {
        if !(a < b) {
            return Err(BrownianError::EmptyBand);
        }
        Ok(ContinuousUpcrossing { inner, a, b })
    }

    pub fn stops(&self, w: &GridPath) -> Result<Vec<ContinuousStop>, BrownianError> {
        Ok(continuous_upcrossing_path(&self.inner.along(w)?, w.dt_f64(), self.a, self.b)?.1)
    }
}

impl PathMartingale for ContinuousUpcrossing {
    fn along(&self, w: &GridPath) -> Result<Vec<f64>, BrownianError> {
        Ok(continuous_upcrossing_path(&self.inner.along(w)?, w.dt_f64(), self.a, self.b)?.0)
    }
}

#[derive(Clone)]
pub struct ContinuousSavings {
    inner: Arc<dyn PathMartingale>,
}

impl ContinuousSavings {
    pub fn new(inner: Arc<dyn PathMartingale>) -> Self {
        ContinuousSavings { inner }
    }

    pub fn stops(&self, w: &GridPath) -> Result<Vec<ContinuousStop>, BrownianError> {
        Ok(continuous_savings_path(&self.inner.along(w)?, w.dt_f64())?.1)
    }
}

impl PathMartingale for ContinuousSavings {
    fn along(&self, w: &GridPath) -> Result<Vec<f64>, BrownianError> {
        Ok(continuous_savings_path(&self.inner.along(w)?, w.dt_f64())?.0)
    }
}

/// Increasing nonnegative times `s_0 < s_1 < …` on which a martingale is
/// given. `unbounded` records that the listed times are a finite window of
/// a grid meant to go on forever.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    times: Vec<Rational64>,
    pub unbounded: bool,
}

impl TimeGrid {
    pub fn new(times: Vec<Rational64>, unbounded: bool) -> Result<Self, BrownianError> {
        let increasing = times.windows(2).all(|w| w[0] < w[1]);
        if times.is_empty() || !increasing || times[0] < Rational64::zero() {
            return Err(BrownianError::BadTimeGrid);
        }
        Ok(TimeGrid { times, unbounded })
    }

    pub fn times(&self) -> &[Rational64] {
        &self.times
    }

    /// First grid time strictly after `t`.
    pub fn first_after(&self, t: Rational64) -> Option<Rational64> {
        self.times.iter().copied().find(|s| *s > t)
    }
}

struct AtTime<'a> {
    m: &'a dyn PathMartingale,
    bound: f64,
}

impl PathFunctional for AtTime<'_> {
    fn bound(&self) -> Option<f64> {
        Some(self.bound)
    }

    fn eval(&self, w: &GridPath) -> f64 {
        self.m.value(w).unwrap_or(f64::NAN)
    }
}

/// `N_t(W) = E_t(M_s)(W)`, estimated by Monte Carlo from `W_{≤t}`, where `s`
/// is the first grid time after `t` unless another grid time `s ≥ t` is
/// given. The half-width comes from the declared bound at `s`.
pub fn extend_grid_martingale(
    m: &dyn PathMartingale,
    grid: &TimeGrid,
    t: Rational64,
    prefix: &GridPath,
    s: Option<Rational64>,
    n_samples: usize,
    seed: u64,
) -> Result<Estimate, BrownianError> {
    let to_f64 = |r: Rational64| r.to_f64().expect("grid times fit in f64");
    let s = match s {
        Some(s) if s >= t && grid.times.contains(&s) => s,
        Some(s) => return Err(BrownianError::NoLaterGridTime(to_f64(s))),
        None => grid
            .first_after(t)
            .ok_or(BrownianError::NoLaterGridTime(to_f64(t)))?,
    };
    let bound = m.bound(to_f64(s)).ok_or(BrownianError::Unbounded)?;
    let f = AtTime { m, bound };
    let est = cond_expectation_t(&f, t, prefix, s, n_samples, seed)?;
    if !est.estimate.is_finite() {
        return Err(BrownianError::NonFinite);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::path::sample_path;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn upcrossing_zigzag() {
        let (n, stops) = continuous_upcrossing_path(&[1.0, 3.0, 1.0, 3.0], 1.0, 1.5, 2.5).unwrap();
        assert_eq!(n, vec![1.0, 3.0, 3.0, 5.0]);
        let times: Vec<(f64, usize)> = stops.iter().map(|s| (s.time, s.step)).collect();
        assert_eq!(times, vec![(0.75, 1), (1.75, 2), (2.75, 3)]);
    }

    #[test]
    fn upcrossing_holds_between_down_and_up() {
        // Starts above b, falls through it at t = 1/4, never reaches a.
        let (n, _) = continuous_upcrossing_path(&[3.0, 1.0, 2.0, 2.0], 1.0, 0.5, 2.5).unwrap();
        assert_eq!(n, vec![3.0, 1.0, 1.0, 1.0]);
        let (n, _) = continuous_upcrossing_path(&[2.0, 3.0, 2.0, 1.0], 1.0, 0.5, 2.5).unwrap();
        assert_eq!(n, vec![2.0, 3.0, 3.0, 3.0]);
        // A hit exactly on a grid point switches there.
        let (n, stops) = continuous_upcrossing_path(&[0.0, 1.0, 2.0, 1.0], 1.0, 0.5, 1.0).unwrap();
        assert_eq!(n, vec![0.0, 1.0, 1.0, 1.0]);
        assert_eq!(stops[0].step, 1);
    }

    #[test]
    fn savings_doubling() {
        let (n, stops) = continuous_savings_path(&[1.0, 2.0, 4.0, 8.0], 1.0).unwrap();
        assert_eq!(n, vec![1.0, 1.5, 2.25, 3.375]);
        assert_eq!(stops.len(), 3);
        let (n, _) = continuous_savings_path(&[2.0, 3.0, 1.0], 1.0).unwrap();
        assert_eq!(n, vec![2.0, 2.5, 1.5]);
        assert!(continuous_savings_path(&[0.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn transforms_are_adapted() {
        let w = sample_path(r(1, 1), r(1, 64), 11).unwrap();
        let m: Arc<dyn PathMartingale> = Arc::new(Markov::Exponential);
        let up = ContinuousUpcrossing::new(m.clone(), 0.8, 1.2).unwrap();
        let full = up.along(&w).unwrap();
        for k in [0, 5, 40, 64] {
            assert_eq!(up.value(&w.prefix_steps(k)).unwrap(), full[k]);
        }
        let sv = ContinuousSavings::new(m);
        let full = sv.along(&w).unwrap();
        for k in [0, 17, 64] {
            assert_eq!(sv.value(&w.prefix_steps(k)).unwrap(), full[k]);
        }
    }

    #[test]
    fn extension_on_grid_times() {
        let grid = TimeGrid::new(vec![r(0, 1), r(1, 2), r(1, 1)], false).unwrap();
        let w = sample_path(r(1, 2), r(1, 32), 2).unwrap();
        let m = Markov::Cosine;
        let est = extend_grid_martingale(&m, &grid, r(1, 2), &w, None, 20_000, 3).unwrap();
        assert!((est.estimate - m.value(&w).unwrap()).abs() < est.half_width);
        let c = Markov::Constant { value: 2.0 };
        let est = extend_grid_martingale(&c, &grid, r(1, 4), &w.prefix(r(1, 4)).unwrap(), None, 10, 3).unwrap();
        assert_eq!(est.estimate, 2.0);
    }

    #[test]
    fn extension_needs_a_bound() {
        let grid = TimeGrid::new(vec![r(1, 1)], true).unwrap();
        let w = GridPath::origin(r(1, 8));
        assert!(matches!(
            extend_grid_martingale(&Markov::Brownian, &grid, r(0, 1), &w, None, 10, 0),
            Err(BrownianError::Unbounded)
        ));
        assert!(TimeGrid::new(vec![r(1, 1), r(1, 1)], true).is_err());
    }
}
