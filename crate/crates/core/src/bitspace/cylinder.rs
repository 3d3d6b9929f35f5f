use super::{BitAssignment, BitspaceError, Position, PositionSet};
use crate::rational::{format_rational, parse_rational, Rational};
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// Largest support a table may be materialized over unless a caller asks for more.
pub const DEFAULT_SUPPORT_CAP: usize = 20;

/// A rational-valued function of finitely many bits of an array.
///
/// The table is dense: entry `i` holds the value on the assignment whose bits,
/// read in support order with the first position as the most significant
/// bit, spell `i` in binary. Values are always kept canonical: the support is
/// sorted lexicographically and contains no position the value ignores.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCylinder", into = "RawCylinder")]
pub struct CylinderFunction {
    support: Vec<Position>,
    table: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawCylinder {
    support: Vec<Position>,
    table: Vec<String>,
}

impl TryFrom<RawCylinder> for CylinderFunction {
    type Error = BitspaceError;

    fn try_from(raw: RawCylinder) -> Result<Self, Self::Error> {
        let table = raw
            .table
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()?;
        CylinderFunction::new(raw.support, table)
    }
}

impl From<CylinderFunction> for RawCylinder {
    fn from(f: CylinderFunction) -> Self {
        RawCylinder {
            table: f.table.iter().map(format_rational).collect(),
            support: f.support,
        }
    }
}

/// Index into a table over `support` for an assignment given by `bit`.
fn pattern_of(support: &[Position], mut bit: impl FnMut(Position) -> bool) -> usize {
    support
        .iter()
        .fold(0usize, |acc, &p| (acc << 1) | usize::from(bit(p)))
}

/// For each position of `sub`, its bit shift inside a pattern over `sup`.
fn shifts_into(sub: &[Position], sup: &[Position]) -> Vec<usize> {
    let k = sup.len();
    sub.iter()
        .map(|p| {
            let i = sup.binary_search(p).expect("subset support");
            k - 1 - i
        })
        .collect()
}

/// Projects a pattern over a superset onto the subset described by `shifts`.
fn project(pattern: usize, shifts: &[usize]) -> usize {
    shifts
        .iter()
        .fold(0usize, |acc, &s| (acc << 1) | ((pattern >> s) & 1))
}

fn check_cap(len: usize, cap: usize) -> Result<(), BitspaceError> {
    if len > cap || len >= usize::BITS as usize {
        return Err(BitspaceError::SupportCap { needed: len, cap });
    }
    Ok(())
}

fn merge_supports(a: &[Position], b: &[Position]) -> Vec<Position> {
    let mut out: Vec<Position> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

impl CylinderFunction {
    pub fn constant(c: Rational) -> Self {
        CylinderFunction {
            support: Vec::new(),
            table: vec![c],
        }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    /// The coordinate function `ω ↦ ω_p` with values 0 and 1.
    pub fn bit(p: Position) -> Self {
        CylinderFunction {
            support: vec![p],
            table: vec![Rational::zero(), num::One::one()],
        }
    }

    /// Builds from a table laid out over `support` in the given order.
    pub fn new(support: Vec<Position>, table: Vec<Rational>) -> Result<Self, BitspaceError> {
        let k = support.len();
        if k >= usize::BITS as usize || table.len() != 1usize << k {
            return Err(BitspaceError::TableSize {
                support: k,
                entries: table.len(),
            });
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(BitspaceError::DuplicatePosition(w[0]));
        }
        let table = if sorted == support {
            table
        } else {
            let shifts = shifts_into(&support, &sorted);
            (0..table.len())
                .map(|pat| table[project(pat, &shifts)].clone())
                .collect()
        };
        Ok(CylinderFunction {
            support: sorted,
            table,
        }
        .pruned())
    }

    /// Tabulates `f` over every assignment of `support`.
    pub fn from_fn(
        support: Vec<Position>,
        cap: usize,
        mut f: impl FnMut(&BitAssignment) -> Rational,
    ) -> Result<Self, BitspaceError> {
        Self::try_from_fn(support, cap, |a| Ok::<_, BitspaceError>(f(a)))
    }

    /// Fallible variant of [`from_fn`](Self::from_fn).
    pub fn try_from_fn<E: From<BitspaceError>>(
        mut support: Vec<Position>,
        cap: usize,
        mut f: impl FnMut(&BitAssignment) -> Result<Rational, E>,
    ) -> Result<Self, E> {
        support.sort_unstable();
        support.dedup();
        check_cap(support.len(), cap)?;
        let table = (0..1usize << support.len())
            .map(|pat| f(&BitAssignment::from_pattern(&support, pat)))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(CylinderFunction { support, table }.pruned())
    }

    pub fn support(&self) -> &[Position] {
        &self.support
    }

    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    pub fn is_constant(&self) -> bool {
        self.support.is_empty()
    }

    /// The value when the function is constant.
    pub fn as_constant(&self) -> Option<&Rational> {
        self.is_constant().then(|| &self.table[0])
    }

    pub fn eval(&self, omega: &BitAssignment) -> Result<&Rational, BitspaceError> {
        let mut missing = None;
        let pat = pattern_of(&self.support, |p| match omega.get(&p) {
            Some(b) => b,
            None => {
                missing.get_or_insert(p);
                false
            }
        });
        match missing {
            Some(p) => Err(BitspaceError::MissingBit(p)),
            None => Ok(&self.table[pat]),
        }
    }

    /// Evaluates with bits supplied by a closure.
    pub fn eval_with(&self, bit: impl FnMut(Position) -> bool) -> &Rational {
        &self.table[pattern_of(&self.support, bit)]
    }

    /// Exact mean under the fair-coin measure.
    pub fn expectation(&self) -> Rational {
        let sum = self
            .table
            .iter()
            .fold(Rational::zero(), |acc, v| acc + v);
        sum / Rational::from_integer(num::BigInt::from(self.table.len()))
    }

    /// `E_D(f)`: averages out every support position outside `d`.
    pub fn cond_expectation(&self, d: &PositionSet) -> CylinderFunction {
        self.cond_expectation_by(|p| d.contains(p))
    }

    /// `E_D(f)` for a past given as a membership predicate.
    pub fn cond_expectation_by(&self, keep: impl Fn(&Position) -> bool) -> CylinderFunction {
        let kept: Vec<Position> = self.support.iter().copied().filter(|p| keep(p)).collect();
        if kept.len() == self.support.len() {
            return self.clone();
        }
        let shifts = shifts_into(&kept, &self.support);
        let mut sums = vec![Rational::zero(); 1usize << kept.len()];
        for (pat, v) in self.table.iter().enumerate() {
            sums[project(pat, &shifts)] += v;
        }
        let denom = Rational::from_integer(num::BigInt::from(
            1usize << (self.support.len() - kept.len()),
        ));
        for s in &mut sums {
            *s /= &denom;
        }
        CylinderFunction {
            support: kept,
            table: sums,
        }
        .pruned()
    }

    /// Agreement on every assignment of the joint support.
    pub fn equal_canonical(&self, other: &CylinderFunction) -> bool {
        // Both sides are pruned at construction, so equal functions are
        // structurally equal.
        self.clone().pruned() == other.clone().pruned()
    }

    /// Table of `self` laid out over a sorted superset of its support.
    pub fn table_over(&self, superset: &[Position]) -> Vec<Rational> {
        let shifts = shifts_into(&self.support, superset);
        (0..1usize << superset.len())
            .map(|pat| self.table[project(pat, &shifts)].clone())
            .collect()
    }

    /// Pointwise combination over the union of supports.
    pub fn zip_with(
        &self,
        other: &CylinderFunction,
        cap: usize,
        f: impl Fn(&Rational, &Rational) -> Rational,
    ) -> Result<CylinderFunction, BitspaceError> {
        let joint = merge_supports(&self.support, &other.support);
        check_cap(joint.len(), cap)?;
        let a = shifts_into(&self.support, &joint);
        let b = shifts_into(&other.support, &joint);
        let table = (0..1usize << joint.len())
            .map(|pat| f(&self.table[project(pat, &a)], &other.table[project(pat, &b)]))
            .collect();
        Ok(CylinderFunction {
            support: joint,
            table,
        }
        .pruned())
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> CylinderFunction {
        CylinderFunction {
            support: self.support.clone(),
            table: self.table.iter().map(f).collect(),
        }
        .pruned()
    }

    pub fn add(&self, other: &CylinderFunction) -> Result<CylinderFunction, BitspaceError> {
        self.zip_with(other, DEFAULT_SUPPORT_CAP, |a, b| a + b)
    }

    pub fn sub(&self, other: &CylinderFunction) -> Result<CylinderFunction, BitspaceError> {
        self.zip_with(other, DEFAULT_SUPPORT_CAP, |a, b| a - b)
    }

    pub fn mul(&self, other: &CylinderFunction) -> Result<CylinderFunction, BitspaceError> {
        self.zip_with(other, DEFAULT_SUPPORT_CAP, |a, b| a * b)
    }

    pub fn scale(&self, c: &Rational) -> CylinderFunction {
        self.map(|v| v * c)
    }

    pub fn abs(&self) -> CylinderFunction {
        self.map(|v| v.abs())
    }

    /// `‖f‖∞`.
    pub fn sup_norm(&self) -> Rational {
        self.table
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn min_value(&self) -> &Rational {
        self.table.iter().min().expect("table is never empty")
    }

    pub fn max_value(&self) -> &Rational {
        self.table.iter().max().expect("table is never empty")
    }

    /// Drops every position the table does not depend on.
    fn pruned(mut self) -> Self {
        let mut i = self.support.len();
        while i > 0 {
            i -= 1;
            let k = self.support.len();
            let shift = k - 1 - i;
            let w = 1usize << shift;
            let redundant = (0..self.table.len())
                .filter(|pat| pat & w == 0)
                .all(|pat| self.table[pat] == self.table[pat | w]);
            if redundant {
                // Entries with the bit clear are already in compressed order.
                self.table = self
                    .table
                    .iter()
                    .enumerate()
                    .filter(|(pat, _)| pat & w == 0)
                    .map(|(_, v)| v.clone())
                    .collect();
                self.support.remove(i);
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn p(r: u64, c: u64) -> Position {
        Position::new(r, c)
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(CylinderFunction::constant(int(5)).expectation(), int(5));
        let f = CylinderFunction::new(vec![p(0, 0)], vec![int(1), int(3)]).unwrap();
        assert_eq!(f.expectation(), int(2));
    }

    #[test]
    fn table_order_is_msb_first() {
        // f = 10*w00 + w01 over support [(0,0),(0,1)]: pattern "10" is index 2.
        let f = CylinderFunction::new(vec![p(0, 0), p(0, 1)], vec![int(0), int(1), int(10), int(11)])
            .unwrap();
        let a = BitAssignment::from_iter([(p(0, 0), true), (p(0, 1), false)]);
        assert_eq!(f.eval(&a).unwrap(), &int(10));
    }

    #[test]
    fn unsorted_support_is_reordered() {
        let f = CylinderFunction::new(vec![p(0, 1), p(0, 0)], vec![int(0), int(1), int(10), int(11)])
            .unwrap();
        assert_eq!(f.support(), &[p(0, 0), p(0, 1)]);
        // First listed position (0,1) was the high bit.
        assert_eq!(f.table(), &[int(0), int(10), int(1), int(11)]);
    }

    #[test]
    fn cond_expectation_on_row_prefix() {
        let f = CylinderFunction::bit(p(0, 0)).add(&CylinderFunction::bit(p(1, 0))).unwrap();
        let g = f.cond_expectation(&PositionSet::RowPrefix(1));
        let expected = CylinderFunction::bit(p(0, 0)).add(&CylinderFunction::constant(rat(1, 2))).unwrap();
        assert_eq!(g, expected);
        assert_eq!(f.cond_expectation(&PositionSet::RowPrefix(0)), CylinderFunction::constant(int(1)));
        assert_eq!(f.cond_expectation(&PositionSet::RowPrefix(2)), f);
    }

    #[test]
    fn canonical_pruning() {
        let redundant = CylinderFunction::new(vec![p(0, 0)], vec![int(1), int(1)]).unwrap();
        assert!(redundant.equal_canonical(&CylinderFunction::constant(int(1))));
        assert!(redundant.support().is_empty());
        let f = CylinderFunction::bit(p(0, 0));
        let g = CylinderFunction::constant(int(1)).sub(&f).unwrap();
        assert!(f.equal_canonical(&f));
        assert!(!f.equal_canonical(&g));
    }

    #[test]
    fn middle_position_pruned() {
        // Depends on (0,0) and (0,2) only.
        let f = CylinderFunction::from_fn(vec![p(0, 0), p(0, 1), p(0, 2)], 20, |a| {
            int(i64::from(a.get(&p(0, 0)).unwrap()) * 2 + i64::from(a.get(&p(0, 2)).unwrap()))
        })
        .unwrap();
        assert_eq!(f.support(), &[p(0, 0), p(0, 2)]);
        assert_eq!(f.table(), &[int(0), int(1), int(2), int(3)]);
    }

    #[test]
    fn support_cap_is_enforced() {
        let support: Vec<_> = (0..5).map(|c| p(0, c)).collect();
        let err = CylinderFunction::from_fn(support, 4, |_| int(0)).unwrap_err();
        assert_eq!(err, BitspaceError::SupportCap { needed: 5, cap: 4 });
    }

    #[test]
    fn rejects_bad_table() {
        assert!(CylinderFunction::new(vec![p(0, 0)], vec![int(1)]).is_err());
        assert!(CylinderFunction::new(vec![p(0, 0), p(0, 0)], vec![int(1); 4]).is_err());
    }

    #[test]
    fn json_round_trip_and_format() {
        let f = CylinderFunction::new(vec![p(0, 0)], vec![rat(1, 2), int(3)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"support":[[0,0]],"table":["1/2","3/1"]}"#);
        let back: CylinderFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<CylinderFunction>(r#"{"support":[[0,0]],"table":["1"]}"#).is_err());
    }
}
