use super::{expect_chain, EngineError, Limits, MartingaleSpec, TimeChain};
use crate::bitspace::{BitspaceError, CylinderFunction, Position, PositionSet};
use std::collections::BTreeMap;

/// `1 +` the largest column of `row` read by `f`, or 0 if `f` ignores the row.
fn row_reach(f: &CylinderFunction, row: u64) -> u64 {
    f.support()
        .iter()
        .filter(|p| p.row == row)
        .map(|p| p.col + 1)
        .max()
        .unwrap_or(0)
}

/// Extends a row-time martingale to lexicographic times by
/// `N_{m,n} = E_{m,n}(M_{m+1})`.
///
/// Only the times at which the level can change are stored: `(m, n)` for
/// `n < max(k(m), 1)` plus the final `(H, 0)`. For a martingale input the
/// level at `(m, 0)` is `M_m` itself.
pub fn extend_to_array(m: &MartingaleSpec, limits: Limits) -> Result<MartingaleSpec, EngineError> {
    expect_chain(m, "rows")?;
    let count = m.levels.len().min(limits.horizon.saturating_add(1));
    if count == 0 {
        return Err(EngineError::Empty);
    }
    for (index, f) in m.levels[..count].iter().enumerate() {
        if f.support().len() > limits.support_cap {
            return Err(BitspaceError::SupportCap {
                needed: f.support().len(),
                cap: limits.support_cap,
            }
            .into());
        }
        let past = PositionSet::RowPrefix(index as u64);
        if let Some(&position) = f.support().iter().find(|p| !past.contains(p)) {
            return Err(EngineError::NotAdapted { index, position });
        }
    }
    let mut times = Vec::new();
    let mut levels = Vec::new();
    for row in 0..count - 1 {
        let next = &m.levels[row + 1];
        let r = row as u64;
        for col in 0..row_reach(next, r).max(1) {
            let t = Position::new(r, col);
            times.push(t);
            levels.push(next.cond_expectation(&PositionSet::LexPrefix(t)));
        }
    }
    times.push(Position::new(count as u64 - 1, 0));
    levels.push(m.levels[count - 1].clone());
    Ok(MartingaleSpec {
        chain: TimeChain::Lex(times),
        levels,
        nonneg: m.nonneg,
        growth_bound: None,
    })
}

/// Levels at the row starts `(m, 0)`.
pub fn restrict_rows(n: &MartingaleSpec) -> Result<MartingaleSpec, EngineError> {
    let times = n.times()?;
    let last = *times.last().ok_or(EngineError::Empty)?;
    let levels = (0..=last.row)
        .filter(|&m| Position::new(m, 0) <= last)
        .map(|m| n.level_at(Position::new(m, 0)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MartingaleSpec {
        chain: TimeChain::Rows,
        levels,
        nonneg: n.nonneg,
        growth_bound: None,
    })
}

/// `k(m)`: the column from which row `m` no longer changes the martingale,
/// certified by `N_{m,k(m)} = N_{m+1,0}`.
pub fn stopping_row_bound(n: &MartingaleSpec) -> Result<BTreeMap<u64, u64>, EngineError> {
    let last = *n.times()?.last().ok_or(EngineError::Empty)?;
    let mut out = BTreeMap::new();
    for row in 0..last.row {
        let next = n.level_at(Position::new(row + 1, 0))?;
        let k = row_reach(&next, row);
        if n.level_at(Position::new(row, k))? != next {
            return Err(EngineError::RowBoundNotCertified { row, k });
        }
        out.insert(row, k);
    }
    Ok(out)
}
