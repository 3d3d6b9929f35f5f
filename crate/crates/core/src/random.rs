//! Seeded generators of random cylinder functions and martingales, for
//! tests, benchmarks and demos.

use crate::bitspace::{CylinderFunction, Position, PositionSet};
use crate::martingale::{MartingaleSpec, OracleMartingale};
use crate::rational::Rational;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeMap;

/// `p/den` with `p` uniform in `lo..=hi`.
pub fn rational<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Rational {
    Rational::new(rng.random_range(lo..=hi).into(), den.into())
}

/// `count` distinct positions of the `rows × cols` window, in lex order.
pub fn positions<R: Rng + ?Sized>(rng: &mut R, rows: u64, cols: u64, count: usize) -> Vec<Position> {
    let mut all: Vec<Position> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| Position::new(r, c)))
        .collect();
    all.shuffle(rng);
    all.truncate(count);
    all.sort_unstable();
    all
}

/// A function on `support` with values `p/den`, `p` uniform in `lo..=hi`.
pub fn function<R: Rng + ?Sized>(rng: &mut R, support: Vec<Position>, lo: i64, hi: i64, den: i64) -> CylinderFunction {
    let table = (0..1usize << support.len()).map(|_| rational(rng, lo, hi, den)).collect();
    CylinderFunction::new(support, table).expect("support is sorted and distinct")
}

/// `M_n = E_n(X)` for a random terminal `X` on the `rows × cols` window,
/// with values in `[lo/den, hi/den]`. Row chain, `rows + 1` levels.
pub fn doob_martingale<R: Rng + ?Sized>(rng: &mut R, rows: u64, cols: u64, lo: i64, hi: i64, den: i64) -> MartingaleSpec {
    let window = positions(rng, rows, cols, (rows * cols) as usize);
    let x = function(rng, window, lo, hi, den);
    let levels = (0..=rows).map(|n| x.cond_expectation(&PositionSet::RowPrefix(n))).collect();
    MartingaleSpec::rows(levels)
}

/// A row-adapted sequence that is generally not a martingale: level `n`
/// reads a random subset of the first `n` rows of the window.
pub fn adapted_sequence<R: Rng + ?Sized>(rng: &mut R, rows: u64, cols: u64, lo: i64, hi: i64, den: i64) -> MartingaleSpec {
    let levels = (0..=rows)
        .map(|n| {
            let size = rng.random_range(0..=(n * cols) as usize);
            let support = positions(rng, n, cols, size);
            function(rng, support, lo, hi, den)
        })
        .collect();
    MartingaleSpec::rows(levels)
}

/// A uniform oracle martingale with oracle column 0 and bets on `(k, 1)`:
/// bet `k` stakes part of the current capital on a guess that depends on
/// oracle bits `(0..=k, 0)` and the earlier bets. Level `n` reads oracle
/// bits of rank below `n + 1`.
pub fn oracle_martingale<R: Rng + ?Sized>(rng: &mut R, bets: usize) -> OracleMartingale {
    let oracle = PositionSet::above(BTreeMap::new(), 1);
    let bet_at: Vec<Position> = (0..bets as u64).map(|k| Position::new(k, 1)).collect();
    let mut levels = vec![CylinderFunction::constant(Rational::from_integer(1.into()))];
    for k in 0..bets {
        let prev = levels[k].clone();
        let mut support: Vec<Position> = prev.support().to_vec();
        support.extend((0..=k as u64).map(|r| Position::new(r, 0)));
        support.push(bet_at[k]);
        support.sort_unstable();
        support.dedup();
        // One random (fraction, guess) per assignment of the visible bits.
        let visible: Vec<Position> = support.iter().copied().filter(|p| *p != bet_at[k]).collect();
        let choices: Vec<(Rational, bool)> = (0..1usize << visible.len())
            .map(|_| (rational(rng, 0, 4, 4), rng.random()))
            .collect();
        let next = CylinderFunction::from_fn(support, usize::MAX >> 1, |a| {
            let key = visible
                .iter()
                .fold(0usize, |acc, p| (acc << 1) | usize::from(a.get(p).unwrap_or(false)));
            let (fraction, guess) = &choices[key];
            let capital = prev.eval(a).expect("support covers prev").clone();
            let stake = &capital * fraction;
            if a.get(&bet_at[k]) == Some(*guess) {
                capital + stake
            } else {
                capital - stake
            }
        })
        .expect("support is sorted");
        levels.push(next);
    }
    OracleMartingale {
        oracle,
        bets: bet_at,
        levels,
        dependency_bound: (1..=bets as u64 + 1).collect(),
    }
}
