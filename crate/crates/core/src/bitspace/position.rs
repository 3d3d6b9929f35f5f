use serde::{Deserialize, Serialize};
use std::fmt;

/// A coordinate `(row, col)` in the bit array `2^(N×N)`.
///
/// The derived ordering is lexicographic: `(k,l) < (m,n)` iff `k < m`, or
/// `k == m` and `l < n`. Sequences of sequences use `row` as the sequence
/// index, so the `n`-th row is the `n`-th coin-flip sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct Position {
    pub row: u64,
    pub col: u64,
}

impl Position {
    pub const fn new(row: u64, col: u64) -> Self {
        Position { row, col }
    }

    /// Lexicographic successor.
    pub fn next(self) -> Self {
        Position::new(self.row, self.col + 1)
    }
}

impl From<[u64; 2]> for Position {
    fn from([row, col]: [u64; 2]) -> Self {
        Position { row, col }
    }
}

impl From<Position> for [u64; 2] {
    fn from(p: Position) -> Self {
        [p.row, p.col]
    }
}

impl From<(u64, u64)> for Position {
    fn from((row, col): (u64, u64)) -> Self {
        Position { row, col }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        assert!(Position::new(0, 100) < Position::new(1, 0));
        assert!(Position::new(2, 3) < Position::new(2, 4));
        assert!(Position::new(2, 3) > Position::new(1, 9));
    }

    #[test]
    fn serializes_as_pair() {
        let s = serde_json::to_string(&Position::new(3, 7)).unwrap();
        assert_eq!(s, "[3,7]");
        let p: Position = serde_json::from_str("[1,2]").unwrap();
        assert_eq!(p, Position::new(1, 2));
    }
}
