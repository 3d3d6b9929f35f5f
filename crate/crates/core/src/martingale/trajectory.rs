//! Pathwise recursions behind the upcrossing and savings transforms.

use super::EngineError;
use crate::bitspace::BitAssignment;
use crate::rational::{self, Rational};
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A stopping time that may be infinite. `Infinite` means the defining event
/// did not happen within the materialized horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extended {
    Finite(usize),
    Infinite,
}

impl Extended {
    pub fn finite(self) -> Option<usize> {
        match self {
            Extended::Finite(n) => Some(n),
            Extended::Infinite => None,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(n) => write!(f, "{n}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    Up,
    Down,
    Doubling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopMark {
    pub kind: StopKind,
    /// Which `σ^up_k`, `σ^down_k` or `τ_k`.
    pub k: usize,
    pub step: usize,
}

/// Capital along one sample with stopping-time annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sample: BitAssignment,
    #[serde(with = "rational::serde_rational_vec")]
    pub values: Vec<Rational>,
    pub stops: Vec<StopMark>,
}

impl Trajectory {
    /// Rows of `step,value,stop` for CSV output.
    pub fn csv_rows(&self) -> Vec<[String; 3]> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mark = self
                    .stops
                    .iter()
                    .filter(|s| s.step == i)
                    .map(|s| match s.kind {
                        StopKind::Up => format!("up{}", s.k),
                        StopKind::Down => format!("down{}", s.k),
                        StopKind::Doubling => format!("tau{}", s.k),
                    })
                    .collect::<Vec<_>>()
                    .join("+");
                [i.to_string(), rational::format_rational(v), mark]
            })
            .collect()
    }
}

/// `σ^up_k` and `σ^down_k` for a finite run of values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingTimes {
    pub up: Vec<usize>,
    pub down: Vec<usize>,
}

impl CrossingTimes {
    /// Number of finite `σ^down_k`. The first one also counts a run that
    /// starts above `a`.
    pub fn completed(&self) -> usize {
        self.down.len()
    }

    /// Completed upcrossings that really start at or below `a`: like
    /// [`completed`](Self::completed) but drops `[σ^up_0, σ^down_0]` when the
    /// values never reach `a` before `σ^down_0`.
    pub fn upcrossings<T: PartialOrd>(&self, values: &[T], a: &T) -> usize {
        match self.down.first() {
            Some(&d) if !values[..d].iter().any(|v| v <= a) => self.down.len() - 1,
            _ => self.down.len(),
        }
    }

    pub fn sigma_up(&self, k: usize) -> Extended {
        self.up.get(k).copied().map_or(Extended::Infinite, Extended::Finite)
    }

    pub fn sigma_down(&self, k: usize) -> Extended {
        self.down.get(k).copied().map_or(Extended::Infinite, Extended::Finite)
    }

    fn marks(&self) -> Vec<StopMark> {
        let mut marks: Vec<StopMark> = self
            .up
            .iter()
            .enumerate()
            .map(|(k, &step)| StopMark { kind: StopKind::Up, k, step })
            .chain(self.down.iter().enumerate().map(|(k, &step)| StopMark {
                kind: StopKind::Down,
                k,
                step,
            }))
            .collect();
        marks.sort_by_key(|m| (m.step, m.kind == StopKind::Up));
        marks
    }
}

/// `σ^up_0 = 0`, `σ^down_k = inf{n > σ^up_k : v_n ≥ b}`,
/// `σ^up_{k+1} = inf{n > σ^down_k : v_n ≤ a}`.
pub fn crossing_times<T: PartialOrd>(values: &[T], a: &T, b: &T) -> CrossingTimes {
    let mut out = CrossingTimes {
        up: vec![0],
        down: Vec::new(),
    };
    let mut rising = true;
    for (n, v) in values.iter().enumerate().skip(1) {
        if rising && v >= b {
            out.down.push(n);
            rising = false;
        } else if !rising && v <= a {
            out.up.push(n);
            rising = true;
        }
    }
    out
}

/// Upcrossing transform along one path: follow `M` while rising from `a`
/// to `b`, hold still while falling back.
pub fn upcrossing_path(
    values: &[Rational],
    a: &Rational,
    b: &Rational,
) -> Result<(Vec<Rational>, CrossingTimes), EngineError> {
    if a >= b {
        return Err(EngineError::EmptyBand {
            a: a.clone(),
            b: b.clone(),
        });
    }
    let times = crossing_times(values, a, b);
    let Some(first) = values.first() else {
        return Ok((Vec::new(), times));
    };
    let mut out = Vec::with_capacity(values.len());
    out.push(first.clone());
    let mut rising = true;
    let mut anchor_m = first.clone();
    let mut anchor_n = first.clone();
    for v in &values[1..] {
        let n = if rising {
            v - &anchor_m + &anchor_n
        } else {
            anchor_n.clone()
        };
        if rising && v >= b {
            rising = false;
            anchor_n = n.clone();
        } else if !rising && v <= a {
            rising = true;
            anchor_m = v.clone();
            anchor_n = n.clone();
        }
        out.push(n);
    }
    Ok((out, times))
}

/// Savings transform along one path. Returns the transformed values and the
/// finite doubling times `τ_0 = 0 < τ_1 < …`.
pub fn savings_path(values: &[Rational]) -> Result<(Vec<Rational>, Vec<usize>), EngineError> {
    let Some(first) = values.first() else {
        return Ok((Vec::new(), vec![0]));
    };
    let half = Rational::new(1.into(), 2.into());
    let mut out = vec![first.clone()];
    let mut taus = vec![0];
    let mut m_tau = first.clone();
    let mut n_tau = first.clone();
    for v in &values[1..] {
        if m_tau.is_zero() {
            return Err(EngineError::ZeroCapitalAtDoubling {
                step: *taus.last().unwrap(),
            });
        }
        let n = &half * &n_tau * (Rational::one() + v / &m_tau);
        if *v >= &m_tau * Rational::from_integer(2.into()) {
            taus.push(out.len());
            m_tau = v.clone();
            n_tau = n.clone();
        }
        out.push(n);
    }
    Ok((out, taus))
}

pub(crate) fn upcrossing_trajectory(
    sample: BitAssignment,
    values: &[Rational],
    a: &Rational,
    b: &Rational,
) -> Result<Trajectory, EngineError> {
    let (values, times) = upcrossing_path(values, a, b)?;
    Ok(Trajectory {
        sample,
        values,
        stops: times.marks(),
    })
}

pub(crate) fn savings_trajectory(
    sample: BitAssignment,
    values: &[Rational],
) -> Result<Trajectory, EngineError> {
    let (values, taus) = savings_path(values)?;
    Ok(Trajectory {
        sample,
        values,
        stops: taus
            .into_iter()
            .enumerate()
            .map(|(k, step)| StopMark {
                kind: StopKind::Doubling,
                k,
                step,
            })
            .collect(),
    })
}
