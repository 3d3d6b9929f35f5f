use super::{EngineError, Limits, MartingaleSpec, TimeChain};
use crate::bitspace::{BitspaceError, CylinderFunction, Position, PositionSet};
use crate::rational::Rational;
use num::Signed;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A uniform family of bet martingales `N^β_n`, one per oracle assignment β,
/// written as functions of the whole array: oracle bits live on `oracle`,
/// the `n`-th bet is placed on `bets[n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMartingale {
    pub oracle: PositionSet,
    pub bets: Vec<Position>,
    pub levels: Vec<CylinderFunction>,
    /// `ℓ(n)`: level `n` reads at most the first `ℓ(n)` oracle positions.
    pub dependency_bound: Vec<u64>,
}

/// Whether [`convert_oracle_martingale`] insists on `N_n ≥ N_m / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SavingsCheck {
    #[default]
    Enforce,
    Skip,
}

/// Rank of `p` in the lexicographic enumeration of `a`. Needs every row of
/// `a` before `p` to be finite.
fn oracle_rank(a: &PositionSet, p: Position) -> Result<u64, EngineError> {
    let mut rank = 0;
    for r in 0..p.row {
        rank += a.row_len(r).ok_or_else(|| {
            EngineError::InvalidOracle(format!("oracle row {r} is infinite; cannot enumerate {p}"))
        })?;
    }
    rank += (0..p.col).filter(|&c| a.contains(&Position::new(p.row, c))).count() as u64;
    Ok(rank)
}

impl OracleMartingale {
    fn validate(&self, count: usize, savings: SavingsCheck) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::InvalidOracle(msg));
        if self.bets.len() + 1 < count {
            return bad(format!(
                "{} levels need at least {} bet positions",
                count,
                count - 1
            ));
        }
        if self.dependency_bound.len() < count {
            return bad(format!("dependency bound covers {} of {count} levels", self.dependency_bound.len()));
        }
        for (i, w) in self.bets.windows(2).enumerate() {
            if w[0] >= w[1] {
                return bad(format!("bet positions must increase lexicographically (index {i})"));
            }
        }
        if let Some(b) = self.bets.iter().find(|b| self.oracle.contains(b)) {
            return bad(format!("bet position {b} lies in the oracle set"));
        }
        for n in 0..count {
            let placed: BTreeSet<Position> = self.bets[..n.min(self.bets.len())].iter().copied().collect();
            for &p in self.levels[n].support() {
                if placed.contains(&p) {
                    continue;
                }
                if !self.oracle.contains(&p) {
                    return Err(EngineError::NotAdapted { index: n, position: p });
                }
                let rank = oracle_rank(&self.oracle, p)?;
                if rank >= self.dependency_bound[n] {
                    return bad(format!(
                        "level {n} reads oracle bit #{rank} at {p}, beyond l({n}) = {}",
                        self.dependency_bound[n]
                    ));
                }
            }
        }
        // Fixing the oracle bits, consecutive levels must be fair bets.
        for n in 0..count.saturating_sub(1) {
            let placed: BTreeSet<Position> = self.bets[..n].iter().copied().collect();
            let oracle = &self.oracle;
            let projected = self.levels[n + 1].cond_expectation_by(|p| oracle.contains(p) || placed.contains(p));
            if projected != self.levels[n] {
                return Err(EngineError::NotAMartingale { index: n });
            }
        }
        if savings == SavingsCheck::Enforce {
            let half = Rational::new(1.into(), 2.into());
            for later in 0..count {
                for earlier in 0..later {
                    let diff = self.levels[later]
                        .zip_with(&self.levels[earlier], usize::MAX >> 1, |x, y| x - &(y * &half))?;
                    if diff.min_value().is_negative() {
                        return Err(EngineError::SavingsPropertyViolated { earlier, later });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Turns a uniform oracle martingale into one array martingale `K` at
/// lexicographic times.
///
/// `K` is stored at `(0,0)`, at every bet position `b_k` (value
/// `E_{b_k}(N_k)`) and just after the last used bet (value of the last level
/// with the unread oracle bits averaged out).
pub fn convert_oracle_martingale(
    n: &OracleMartingale,
    limits: Limits,
    savings: SavingsCheck,
) -> Result<MartingaleSpec, EngineError> {
    let count = n.levels.len().min(limits.horizon.saturating_add(1));
    if count == 0 {
        return Err(EngineError::Empty);
    }
    for f in &n.levels[..count] {
        if f.support().len() > limits.support_cap {
            return Err(BitspaceError::SupportCap {
                needed: f.support().len(),
                cap: limits.support_cap,
            }
            .into());
        }
    }
    n.validate(count, savings)?;
    let mut times = Vec::new();
    let mut levels = Vec::new();
    let mut push = |t: Position, level: &CylinderFunction| {
        if times.last() != Some(&t) {
            times.push(t);
            levels.push(level.cond_expectation(&PositionSet::LexPrefix(t)));
        }
    };
    push(Position::new(0, 0), &n.levels[0]);
    for k in 0..count - 1 {
        push(n.bets[k], &n.levels[k]);
    }
    let end = if count == 1 {
        n.bets.first().copied().unwrap_or(Position::new(0, 0))
    } else {
        n.bets[count - 2].next()
    };
    push(end, &n.levels[count - 1]);
    let nonneg = levels.iter().all(|f| !f.min_value().is_negative());
    Ok(MartingaleSpec {
        chain: TimeChain::Lex(times),
        levels,
        nonneg,
        growth_bound: None,
    })
}
