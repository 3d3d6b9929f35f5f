#![allow(dead_code)]

use doob_core::bitspace::{BitAssignment, CylinderFunction, Position, PositionSet};
use doob_core::rational::Rational;
use doob_core::random;
use rand::Rng;
use std::collections::BTreeSet;

pub fn window(rows: u64, cols: u64) -> Vec<Position> {
    (0..rows)
        .flat_map(|r| (0..cols).map(move |c| Position::new(r, c)))
        .collect()
}

/// A random set of one of the four kinds, together with a random subset of
/// it (checked on `win`).
pub fn nested_sets<R: Rng>(rng: &mut R, win: &[Position]) -> (PositionSet, PositionSet) {
    let d = match rng.random_range(0..4) {
        0 => PositionSet::RowPrefix(rng.random_range(0..=3)),
        1 => PositionSet::LexPrefix(win[rng.random_range(0..win.len())]),
        2 => PositionSet::above(Default::default(), rng.random_range(0..=4)),
        _ => PositionSet::explicit(win.iter().copied().filter(|_| rng.random_bool(0.6))),
    };
    let inside: Vec<Position> = win.iter().copied().filter(|p| d.contains(p)).collect();
    // Structured candidates that happen to lie inside D, else a subset.
    let mut candidates: Vec<PositionSet> = (0..=3).map(PositionSet::RowPrefix).collect();
    candidates.extend(win.iter().map(|&p| PositionSet::LexPrefix(p)));
    candidates.retain(|c| win.iter().all(|p| !c.contains(p) || d.contains(p)));
    let c = if rng.random_bool(0.5) || candidates.is_empty() {
        PositionSet::explicit(inside.iter().copied().filter(|_| rng.random_bool(0.5)))
    } else {
        candidates.swap_remove(rng.random_range(0..candidates.len()))
    };
    (c, d)
}

pub fn function_on<R: Rng>(rng: &mut R, win: &[Position], max_support: usize) -> CylinderFunction {
    let k = rng.random_range(0..=max_support.min(win.len()));
    let mut chosen: Vec<Position> = win.to_vec();
    for i in 0..k {
        let j = rng.random_range(i..chosen.len());
        chosen.swap(i, j);
    }
    chosen.truncate(k);
    chosen.sort_unstable();
    random::function(rng, chosen, -8, 8, 4)
}

pub fn function_inside<R: Rng>(rng: &mut R, win: &[Position], d: &PositionSet, max_support: usize) -> CylinderFunction {
    let inside: Vec<Position> = win.iter().copied().filter(|p| d.contains(p)).collect();
    function_on(rng, &inside, max_support)
}

/// Brute-force conditional expectation: the average of `f` over the
/// assignments that agree with `omega` on `d`.
pub fn brute_cond(f: &CylinderFunction, d: &PositionSet, omega: &BitAssignment) -> Rational {
    let s = f.support();
    let free: Vec<Position> = s.iter().copied().filter(|p| !d.contains(p)).collect();
    let fixed: BTreeSet<Position> = s.iter().copied().filter(|p| d.contains(p)).collect();
    let mut sum = Rational::from_integer(0.into());
    for pat in 0..1usize << free.len() {
        let mut a = BitAssignment::from_pattern(&free, pat);
        for p in &fixed {
            a.insert(*p, omega.get(p).unwrap_or(false)).unwrap();
        }
        sum += f.eval(&a).unwrap();
    }
    sum / Rational::from_integer((1i64 << free.len()).into())
}
