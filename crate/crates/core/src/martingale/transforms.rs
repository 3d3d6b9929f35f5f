use super::trajectory::{savings_path, savings_trajectory, upcrossing_path, upcrossing_trajectory};
use super::{check_nonneg, EngineError, Limits, MartingaleSpec, Trajectory};
use crate::bitspace::{BitAssignment, BitspaceError, CylinderFunction, Position};
use crate::rational::Rational;
use num::Signed;
use rayon::prelude::*;
use serde::Serialize;

/// Output of [`repair`]: a martingale and how far each level moved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Repaired {
    pub martingale: MartingaleSpec,
    /// `‖L_n − N_n‖∞` per level.
    #[serde(with = "crate::rational::serde_rational_vec")]
    pub drift: Vec<Rational>,
}

/// Turns an adapted sequence into a martingale:
/// `L_0 = N_0`, `L_{n+1} = N_{n+1} − E_n(N_{n+1}) + L_n`.
pub fn repair(n: &MartingaleSpec, limits: Limits) -> Result<Repaired, EngineError> {
    let count = n.levels.len().min(limits.horizon.saturating_add(1));
    if count == 0 {
        return Err(EngineError::Empty);
    }
    for (index, f) in n.levels[..count].iter().enumerate() {
        let past = n.past(index)?;
        if let Some(&position) = f.support().iter().find(|p| !past.contains(p)) {
            return Err(EngineError::NotAdapted { index, position });
        }
    }
    let cap = limits.support_cap;
    let mut levels = vec![n.levels[0].clone()];
    let mut drift = vec![Rational::from_integer(0.into())];
    for i in 0..count - 1 {
        let next = &n.levels[i + 1];
        let correction = next.cond_expectation(&n.past(i)?);
        let l = next.sub(&correction)?.zip_with(&levels[i], cap, |x, y| x + y)?;
        drift.push(l.zip_with(next, cap, |x, y| x - y)?.sup_norm());
        levels.push(l);
    }
    let nonneg = levels.iter().all(|f| !f.min_value().is_negative());
    Ok(Repaired {
        martingale: MartingaleSpec {
            chain: n.chain.clone(),
            levels,
            nonneg,
            growth_bound: None,
        },
        drift,
    })
}

/// Applies a pathwise transform to every assignment of the joint support of
/// the first `horizon + 1` levels and tabulates the result.
fn materialize<F>(m: &MartingaleSpec, limits: Limits, path: F) -> Result<MartingaleSpec, EngineError>
where
    F: Fn(&[Rational]) -> Result<Vec<Rational>, EngineError> + Sync,
{
    let count = m.levels.len().min(limits.horizon.saturating_add(1));
    if count == 0 {
        return Err(EngineError::Empty);
    }
    let mut support: Vec<Position> = m.levels[..count]
        .iter()
        .flat_map(|f| f.support().iter().copied())
        .collect();
    support.sort_unstable();
    support.dedup();
    if support.len() > limits.support_cap {
        return Err(BitspaceError::SupportCap {
            needed: support.len(),
            cap: limits.support_cap,
        }
        .into());
    }
    let tables: Vec<Vec<Rational>> = m.levels[..count]
        .iter()
        .map(|f| f.table_over(&support))
        .collect();
    let rows: Vec<Vec<Rational>> = (0..1usize << support.len())
        .into_par_iter()
        .map(|pattern| {
            let values: Vec<Rational> = tables.iter().map(|t| t[pattern].clone()).collect();
            path(&values)
        })
        .collect::<Result<_, _>>()?;
    let mut levels = Vec::with_capacity(count);
    for i in 0..count {
        let table = rows.iter().map(|r| r[i].clone()).collect();
        levels.push(CylinderFunction::new(support.clone(), table)?);
    }
    let nonneg = levels.iter().all(|f| !f.min_value().is_negative());
    Ok(MartingaleSpec {
        chain: m.chain.clone(),
        levels,
        nonneg,
        growth_bound: None,
    })
}

/// Doob's upcrossing transform of a nonnegative martingale over `[a, b]`.
pub fn upcrossing_transform(
    m: &MartingaleSpec,
    a: &Rational,
    b: &Rational,
    limits: Limits,
) -> Result<MartingaleSpec, EngineError> {
    if a >= b {
        return Err(EngineError::EmptyBand {
            a: a.clone(),
            b: b.clone(),
        });
    }
    check_nonneg(m)?;
    materialize(m, limits, |v| upcrossing_path(v, a, b).map(|(n, _)| n))
}

/// Savings transform: bank half the capital every time it doubles.
pub fn savings_transform(m: &MartingaleSpec, limits: Limits) -> Result<MartingaleSpec, EngineError> {
    check_nonneg(m)?;
    materialize(m, limits, |v| savings_path(v).map(|(n, _)| n))
}

impl MartingaleSpec {
    /// Values of every level on a finite sample covering their supports.
    pub fn values_on(&self, sample: &BitAssignment) -> Result<Vec<Rational>, EngineError> {
        self.levels
            .iter()
            .map(|f| f.eval(sample).cloned().map_err(EngineError::from))
            .collect()
    }

    /// Upcrossing transform evaluated along one sample; no support cap applies.
    pub fn upcrossing_trajectory(
        &self,
        sample: &BitAssignment,
        a: &Rational,
        b: &Rational,
    ) -> Result<Trajectory, EngineError> {
        upcrossing_trajectory(sample.clone(), &self.values_on(sample)?, a, b)
    }

    /// Savings transform evaluated along one sample; no support cap applies.
    pub fn savings_trajectory(&self, sample: &BitAssignment) -> Result<Trajectory, EngineError> {
        savings_trajectory(sample.clone(), &self.values_on(sample)?)
    }
}
