use super::{BitspaceError, Position};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Row thresholds `f : N -> N` given by a finite table plus a default for
/// every row not listed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    #[serde(default)]
    pub table: BTreeMap<u64, u64>,
    #[serde(default)]
    pub default: u64,
    /// `false` selects `A_f = {(m,n) | f(m) > n}`, `true` selects the
    /// complement `B_f = {(m,n) | f(m) <= n}`.
    #[serde(default)]
    pub complemented: bool,
}

impl Thresholds {
    pub fn at(&self, row: u64) -> u64 {
        self.table.get(&row).copied().unwrap_or(self.default)
    }
}

/// The "past" `D ⊆ N×N` that a conditional expectation keeps fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionSet {
    /// All positions in rows `0..n`.
    RowPrefix(u64),
    /// All positions lexicographically below the given one.
    LexPrefix(Position),
    /// Positions above (or, when complemented, below) a row-threshold function.
    BelowFunction(Thresholds),
    Explicit(BTreeSet<Position>),
}

/// Shape of `D^c` restricted to a single row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum RowComplement {
    /// Finitely many columns, sorted.
    Finite(Vec<u64>),
    /// Every column `>= skip` except those in `excluded`.
    Cofinite { skip: u64, excluded: BTreeSet<u64> },
}

impl RowComplement {
    fn is_empty(&self) -> bool {
        matches!(self, RowComplement::Finite(cols) if cols.is_empty())
    }

    fn nth(&self, j: u64) -> Option<u64> {
        match self {
            RowComplement::Finite(cols) => cols.get(j as usize).copied(),
            RowComplement::Cofinite { skip, excluded } => {
                let mut seen = 0;
                let mut c = *skip;
                loop {
                    if !excluded.contains(&c) {
                        if seen == j {
                            return Some(c);
                        }
                        seen += 1;
                    }
                    c += 1;
                }
            }
        }
    }

    fn rank(&self, col: u64) -> Option<u64> {
        match self {
            RowComplement::Finite(cols) => cols.iter().position(|&c| c == col).map(|i| i as u64),
            RowComplement::Cofinite { skip, excluded } => {
                if col < *skip || excluded.contains(&col) {
                    return None;
                }
                Some(col - skip - excluded.range(*skip..col).count() as u64)
            }
        }
    }
}

impl PositionSet {
    /// `A_f`: positions with column below the threshold of their row.
    pub fn above(table: BTreeMap<u64, u64>, default: u64) -> Self {
        PositionSet::BelowFunction(Thresholds {
            table,
            default,
            complemented: false,
        })
    }

    /// `B_f`: positions with column at or past the threshold of their row.
    pub fn below(table: BTreeMap<u64, u64>, default: u64) -> Self {
        PositionSet::BelowFunction(Thresholds {
            table,
            default,
            complemented: true,
        })
    }

    pub fn explicit<I: IntoIterator<Item = Position>>(it: I) -> Self {
        PositionSet::Explicit(it.into_iter().collect())
    }

    pub fn contains(&self, p: &Position) -> bool {
        match self {
            PositionSet::RowPrefix(n) => p.row < *n,
            PositionSet::LexPrefix(q) => p < q,
            PositionSet::BelowFunction(f) => (p.col < f.at(p.row)) != f.complemented,
            PositionSet::Explicit(set) => set.contains(p),
        }
    }

    /// Number of positions of `self` in `row`, or `None` if infinite.
    pub fn row_len(&self, row: u64) -> Option<u64> {
        match self.complement_row(row) {
            RowComplement::Finite(_) => None,
            RowComplement::Cofinite { skip, excluded } => Some(skip + excluded.len() as u64),
        }
    }

    /// Checks `self ⊆ other` on the given window of positions.
    pub fn is_subset_on<'a, I>(&self, other: &PositionSet, window: I) -> bool
    where
        I: IntoIterator<Item = &'a Position>,
    {
        window
            .into_iter()
            .all(|p| !self.contains(p) || other.contains(p))
    }

    /// First row from which every row has the same complement shape.
    fn uniform_from(&self) -> u64 {
        match self {
            PositionSet::RowPrefix(n) => *n,
            PositionSet::LexPrefix(p) => p.row + 1,
            PositionSet::BelowFunction(f) => f.table.keys().next_back().map_or(0, |r| r + 1),
            PositionSet::Explicit(set) => set.iter().next_back().map_or(0, |p| p.row + 1),
        }
    }

    pub(crate) fn complement_row(&self, row: u64) -> RowComplement {
        let all = RowComplement::Cofinite {
            skip: 0,
            excluded: BTreeSet::new(),
        };
        match self {
            PositionSet::RowPrefix(n) => {
                if row < *n {
                    RowComplement::Finite(Vec::new())
                } else {
                    all
                }
            }
            PositionSet::LexPrefix(p) => {
                if row < p.row {
                    RowComplement::Finite(Vec::new())
                } else if row == p.row {
                    RowComplement::Cofinite {
                        skip: p.col,
                        excluded: BTreeSet::new(),
                    }
                } else {
                    all
                }
            }
            PositionSet::BelowFunction(f) => {
                let t = f.at(row);
                if f.complemented {
                    RowComplement::Finite((0..t).collect())
                } else {
                    RowComplement::Cofinite {
                        skip: t,
                        excluded: BTreeSet::new(),
                    }
                }
            }
            PositionSet::Explicit(set) => RowComplement::Cofinite {
                skip: 0,
                excluded: set
                    .range(Position::new(row, 0)..=Position::new(row, u64::MAX))
                    .map(|p| p.col)
                    .collect(),
            },
        }
    }

    /// Index of the `i`-th row (0-based) on which `D^c` is nonempty.
    fn nth_complement_row(&self, i: u64) -> Option<u64> {
        let r0 = self.uniform_from();
        let mut count = 0;
        for r in 0..r0 {
            if !self.complement_row(r).is_empty() {
                if count == i {
                    return Some(r);
                }
                count += 1;
            }
        }
        if self.complement_row(r0).is_empty() {
            None
        } else {
            Some(r0 + (i - count))
        }
    }

    /// Number of rows before `row` on which `D^c` is nonempty.
    fn complement_rows_before(&self, row: u64) -> u64 {
        let r0 = self.uniform_from();
        let head = (0..row.min(r0))
            .filter(|&r| !self.complement_row(r).is_empty())
            .count() as u64;
        if row > r0 && !self.complement_row(r0).is_empty() {
            head + (row - r0)
        } else {
            head
        }
    }

    /// Places tail coordinate `(i, j)` into `D^c`.
    ///
    /// `D^c` is read row by row in lexicographic order: tail row `i` lands on
    /// the `i`-th nonempty row of `D^c`, tail column `j` on the `j`-th column of
    /// `D^c` within that row.
    pub fn complement_position(&self, tail: Position) -> Result<Position, BitspaceError> {
        let row = self
            .nth_complement_row(tail.row)
            .ok_or(BitspaceError::NoRoomInComplement(tail))?;
        let col = self
            .complement_row(row)
            .nth(tail.col)
            .ok_or(BitspaceError::NoRoomInComplement(tail))?;
        Ok(Position::new(row, col))
    }

    /// Inverse of [`complement_position`](Self::complement_position); `None` for `p ∈ D`.
    pub fn complement_index(&self, p: Position) -> Option<Position> {
        if self.contains(&p) {
            return None;
        }
        let col = self.complement_row(p.row).rank(p.col)?;
        Some(Position::new(self.complement_rows_before(p.row), col))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: u64, c: u64) -> Position {
        Position::new(r, c)
    }

    #[test]
    fn membership() {
        assert!(PositionSet::RowPrefix(2).contains(&p(1, 999)));
        assert!(!PositionSet::RowPrefix(2).contains(&p(2, 0)));
        assert!(PositionSet::LexPrefix(p(1, 2)).contains(&p(1, 1)));
        assert!(!PositionSet::LexPrefix(p(1, 2)).contains(&p(1, 2)));
        let a = PositionSet::above(BTreeMap::from([(0, 3)]), 1);
        assert!(a.contains(&p(0, 2)));
        assert!(!a.contains(&p(0, 3)));
        assert!(a.contains(&p(5, 0)));
        assert!(!a.contains(&p(5, 1)));
        let b = PositionSet::below(BTreeMap::from([(0, 3)]), 1);
        assert!(b.contains(&p(0, 3)) && !b.contains(&p(0, 2)));
    }

    #[test]
    fn lex_prefix_relabeling_matches_array_concatenation() {
        // omega_{<(m,n)} ^ xi places xi_{0,l} at (m, n+l) and xi_{k,l} at (m+k, l).
        let d = PositionSet::LexPrefix(p(1, 2));
        assert_eq!(d.complement_position(p(0, 0)).unwrap(), p(1, 2));
        assert_eq!(d.complement_position(p(0, 5)).unwrap(), p(1, 7));
        assert_eq!(d.complement_position(p(1, 0)).unwrap(), p(2, 0));
        assert_eq!(d.complement_position(p(3, 4)).unwrap(), p(4, 4));
    }

    #[test]
    fn row_prefix_relabeling_shifts_rows() {
        let d = PositionSet::RowPrefix(3);
        assert_eq!(d.complement_position(p(0, 4)).unwrap(), p(3, 4));
        assert_eq!(d.complement_position(p(2, 0)).unwrap(), p(5, 0));
    }

    #[test]
    fn complement_index_inverts_placement() {
        let sets = [
            PositionSet::RowPrefix(2),
            PositionSet::LexPrefix(p(1, 3)),
            PositionSet::above(BTreeMap::from([(0, 2), (2, 0)]), 1),
            PositionSet::explicit([p(0, 1), p(0, 3), p(2, 0)]),
        ];
        for d in &sets {
            for r in 0..4 {
                for c in 0..6 {
                    let tail = p(r, c);
                    let placed = d.complement_position(tail).unwrap();
                    assert!(!d.contains(&placed));
                    assert_eq!(d.complement_index(placed), Some(tail), "{d:?} {tail}");
                }
            }
        }
    }

    #[test]
    fn finite_complement_runs_out() {
        // D = B_f with f = 2 on row 0 and 0 elsewhere: D^c = {(0,0), (0,1)}.
        let d = PositionSet::below(BTreeMap::from([(0, 2)]), 0);
        assert_eq!(d.complement_position(p(0, 1)).unwrap(), p(0, 1));
        assert!(d.complement_position(p(0, 2)).is_err());
        assert!(d.complement_position(p(1, 0)).is_err());
    }
}
