use super::{BitspaceError, Position, PositionSet};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Finite truncation of a bit array: each listed position carries one bit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitAssignment {
    bits: BTreeMap<Position, bool>,
}

impl BitAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an assignment, rejecting a position listed twice.
    pub fn try_from_pairs<I>(pairs: I) -> Result<Self, BitspaceError>
    where
        I: IntoIterator<Item = (Position, bool)>,
    {
        let mut out = BitAssignment::new();
        for (p, b) in pairs {
            out.insert(p, b)?;
        }
        Ok(out)
    }

    /// Assigns `positions[i]` the `i`-th most significant bit of `pattern`.
    pub fn from_pattern(positions: &[Position], pattern: usize) -> Self {
        let k = positions.len();
        let bits = positions
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, (pattern >> (k - 1 - i)) & 1 == 1))
            .collect();
        BitAssignment { bits }
    }

    pub fn insert(&mut self, p: Position, bit: bool) -> Result<(), BitspaceError> {
        if self.bits.insert(p, bit).is_some() {
            return Err(BitspaceError::DuplicatePosition(p));
        }
        Ok(())
    }

    pub fn get(&self, p: &Position) -> Option<bool> {
        self.bits.get(p).copied()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Position, bool)> + '_ {
        self.bits.iter().map(|(&p, &b)| (p, b))
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        self.bits.keys().copied()
    }

    pub fn restrict(&self, d: &PositionSet) -> BitAssignment {
        BitAssignment {
            bits: self
                .bits
                .iter()
                .filter(|(p, _)| d.contains(p))
                .map(|(&p, &b)| (p, b))
                .collect(),
        }
    }

    /// `ω_D ⌢_D ξ`: keeps `prefix` (which must lie in `D`) and relabels the
    /// tail into `D^c`.
    pub fn concat(
        prefix: &BitAssignment,
        tail: &BitAssignment,
        d: &PositionSet,
    ) -> Result<BitAssignment, BitspaceError> {
        let mut out = BitAssignment::new();
        for (p, b) in prefix.iter() {
            if !d.contains(&p) {
                return Err(BitspaceError::PrefixOutsideSet(p));
            }
            out.insert(p, b)?;
        }
        for (t, b) in tail.iter() {
            let placed = d.complement_position(t)?;
            out.insert(placed, b)
                .map_err(|_| BitspaceError::Overlap(placed))?;
        }
        Ok(out)
    }

    /// Inverse of [`concat`](Self::concat): `(ω_D, ω_{D^c})` with the tail in
    /// relabeled coordinates.
    pub fn split(&self, d: &PositionSet) -> (BitAssignment, BitAssignment) {
        let mut prefix = BTreeMap::new();
        let mut tail = BTreeMap::new();
        for (p, b) in self.iter() {
            match d.complement_index(p) {
                None => {
                    prefix.insert(p, b);
                }
                Some(t) => {
                    tail.insert(t, b);
                }
            }
        }
        (BitAssignment { bits: prefix }, BitAssignment { bits: tail })
    }
}

impl FromIterator<(Position, bool)> for BitAssignment {
    /// Later duplicates overwrite earlier ones; use
    /// [`BitAssignment::try_from_pairs`] to reject them instead.
    fn from_iter<I: IntoIterator<Item = (Position, bool)>>(iter: I) -> Self {
        BitAssignment {
            bits: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: u64, c: u64) -> Position {
        Position::new(r, c)
    }

    #[test]
    fn empty_prefix_relabels_tail() {
        let d = PositionSet::RowPrefix(2);
        let tail = BitAssignment::from_iter([(p(0, 0), true), (p(1, 3), false)]);
        let out = BitAssignment::concat(&BitAssignment::new(), &tail, &d).unwrap();
        assert_eq!(out.get(&p(2, 0)), Some(true));
        assert_eq!(out.get(&p(3, 3)), Some(false));
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn split_then_concat_round_trips() {
        let omega: BitAssignment = (0..3)
            .flat_map(|r| (0..4).map(move |c| (p(r, c), (r * 7 + c * 3) % 2 == 0)))
            .collect();
        let d = PositionSet::LexPrefix(p(1, 0));
        let (prefix, tail) = omega.split(&d);
        assert_eq!(prefix.len(), 4);
        assert_eq!(BitAssignment::concat(&prefix, &tail, &d).unwrap(), omega);
    }

    #[test]
    fn sequence_space_concatenation_by_hand() {
        // omega_{<n} ^ xi: row k of xi becomes row n+k.
        let d = PositionSet::RowPrefix(1);
        let prefix = BitAssignment::from_iter([(p(0, 0), true), (p(0, 1), false)]);
        let cases = [
            (vec![(p(0, 0), true)], vec![(p(1, 0), true)]),
            (vec![(p(0, 2), false), (p(1, 1), true)], vec![(p(1, 2), false), (p(2, 1), true)]),
            (vec![(p(2, 5), true)], vec![(p(3, 5), true)]),
        ];
        for (tail, expected_tail) in cases {
            let tail = BitAssignment::from_iter(tail);
            let out = BitAssignment::concat(&prefix, &tail, &d).unwrap();
            let mut expected = prefix.clone();
            for (q, b) in expected_tail {
                expected.insert(q, b).unwrap();
            }
            assert_eq!(out, expected);
        }
    }

    #[test]
    fn rejects_overlap_and_stray_prefix() {
        let d = PositionSet::RowPrefix(1);
        let stray = BitAssignment::from_iter([(p(1, 0), true)]);
        assert!(matches!(
            BitAssignment::concat(&stray, &BitAssignment::new(), &d),
            Err(BitspaceError::PrefixOutsideSet(_))
        ));
        let finite = PositionSet::below(Default::default(), 0);
        // D = everything, so D^c is empty and any tail overflows.
        let tail = BitAssignment::from_iter([(p(0, 0), true)]);
        assert!(BitAssignment::concat(&BitAssignment::new(), &tail, &finite).is_err());
    }

    #[test]
    fn duplicate_positions_rejected() {
        assert!(BitAssignment::try_from_pairs([(p(0, 0), true), (p(0, 0), false)]).is_err());
    }
}
