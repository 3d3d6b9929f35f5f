use super::BrownianError;
use serde::Serialize;

/// A first hitting time, or the statement that the level was not reached
/// by the end of the materialized run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HitTime {
    At(f64),
    NotHitBy(f64),
}

impl HitTime {
    pub fn time(self) -> Option<f64> {
        match self {
            HitTime::At(t) => Some(t),
            HitTime::NotHitBy(_) => None,
        }
    }
}

/// Least `t ≥ start` at which the linear interpolation of `values` (on the
/// grid `i·dt`) equals `level`.
pub fn hitting_time(values: &[f64], dt: f64, start: f64, level: f64) -> HitTime {
    let horizon = values.len().saturating_sub(1) as f64 * dt;
    if values.is_empty() || start > horizon {
        return HitTime::NotHitBy(horizon);
    }
    let last = values.len() - 1;
    let x = (start / dt).max(0.0);
    let mut i = (x.floor() as usize).min(last);
    // Value at `start` and the time it belongs to.
    let (mut t0, mut v0) = if i == last {
        (horizon, values[last])
    } else {
        let w = x - i as f64;
        (start, values[i] * (1.0 - w) + values[i + 1] * w)
    };
    if v0 == level {
        return HitTime::At(t0);
    }
    while i < last {
        let t1 = (i + 1) as f64 * dt;
        let v1 = values[i + 1];
        if (v0 - level) * (v1 - level) <= 0.0 {
            let t = t0 + (level - v0) / (v1 - v0) * (t1 - t0);
            return HitTime::At(t.clamp(t0, t1));
        }
        t0 = t1;
        v0 = v1;
        i += 1;
    }
    HitTime::NotHitBy(horizon)
}

/// Values at interior local minima and maxima, plus both endpoints.
pub fn local_extrema(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    if let Some(&first) = values.first() {
        out.push(first);
    }
    for w in values.windows(3) {
        if (w[1] - w[0]) * (w[2] - w[1]) <= 0.0 {
            out.push(w[1]);
        }
    }
    if values.len() > 1 {
        out.push(values[values.len() - 1]);
    }
    out
}

/// Picks `count` levels in `(lo, hi)` that no sample equals: each is the
/// midpoint of the currently widest gap between distinct samples, the
/// interval ends and earlier picks.
pub fn select_nonatom_levels(samples: &[f64], lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, BrownianError> {
    if !(lo < hi) {
        return Err(BrownianError::EmptyInterval);
    }
    let mut cuts: Vec<f64> = samples
        .iter()
        .copied()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut i = 0;
        for j in 1..cuts.len() - 1 {
            if cuts[j + 1] - cuts[j] > cuts[i + 1] - cuts[i] {
                i = j;
            }
        }
        let (a, b) = (cuts[i], cuts[i + 1]);
        let mid = a + (b - a) / 2.0;
        if !(mid > a && mid < b) {
            return Err(BrownianError::Saturated);
        }
        out.push(mid);
        cuts.insert(i + 1, mid);
    }
    Ok(out)
}
