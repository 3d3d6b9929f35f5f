use doob_core::bitspace::{BitAssignment, Position};
use doob_core::brownian::{
    bits_to_path, cond_expectation_t, extend_grid_martingale, hitting_time, local_extrema, path_to_bits,
    sample_path, sample_paths, select_nonatom_levels, ClampedTerminal, ContinuousSavings, ContinuousUpcrossing,
    FnFunctional, GridPath, HitTime, Markov, PathFunctional, PathMartingale, TimeGrid,
};
use doob_core::rng::substream;
use num::rational::Rational64;
use proptest::prelude::*;
use rand::Rng;
use std::sync::Arc;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn increments_are_standard_normal() {
    let n = 40_000;
    let paths = sample_paths(r(1, 1), r(1, 8), 12, n).unwrap();
    let w1: Vec<f64> = paths.iter().map(|w| w.last()).collect();
    let (m, v) = mean_var(&w1);
    assert!(m.abs() < 4.0 / (n as f64).sqrt(), "{m}");
    assert!((v - 1.0).abs() < 0.05, "{v}");
    // W_{1/2} and W_1 − W_{1/2} are uncorrelated.
    let cov = paths
        .iter()
        .map(|w| w.value(4) * (w.last() - w.value(4)))
        .sum::<f64>()
        / n as f64;
    assert!(cov.abs() < 4.0 * 0.5 / (n as f64).sqrt(), "{cov}");
}

/// First point of the grid `k·h` (`h` dividing the path's step), from `start`
/// on, with the interpolated path on the other side of (or at) `level`.
fn scan(w: &GridPath, start: f64, level: f64, h: f64) -> Option<f64> {
    let end = w.time(w.steps());
    let side = (w.at(start) - level).signum();
    if side == 0.0 {
        return Some(start);
    }
    let mut k = (start / h).ceil() as u64;
    loop {
        let t = k as f64 * h;
        if t > end + 1e-12 {
            return None;
        }
        if (w.at(t.min(end)) - level).signum() != side {
            return Some(t);
        }
        k += 1;
    }
}

#[test]
fn hitting_times_agree_with_fine_scan() {
    let mut rng = substream(5, 0);
    let dt = 1.0 / 64.0;
    for i in 0..100 {
        let w = sample_path(r(1, 1), r(1, 64), 100 + i).unwrap();
        let start = rng.random_range(0.0..0.5);
        let v = w.values();
        let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        let level = rng.random_range(lo - 0.1..hi + 0.1);
        let fine = dt / 100.0;
        let got = hitting_time(&v, dt, start, level);
        match (got, scan(&w, start, level, fine)) {
            (HitTime::At(t), Some(s)) => assert!(s >= t - 1e-12 && s - t <= fine + 1e-12, "{t} vs {s}"),
            (HitTime::NotHitBy(_), None) => {}
            // The scan can miss a touch that ends exactly at a grid point.
            (HitTime::At(t), None) => assert!((w.at(t) - level).abs() < 1e-9),
            (g, s) => panic!("{g:?} vs {s:?}"),
        }
    }
}

#[test]
fn nonatom_levels_avoid_every_sample() {
    let mut rng = substream(6, 0);
    for _ in 0..1000 {
        let k = rng.random_range(0..20);
        let samples: Vec<f64> = (0..k).map(|_| f64::from(rng.random_range(0..8u8)) / 4.0).collect();
        let levels = select_nonatom_levels(&samples, 0.0, 2.0, 3).unwrap();
        for l in levels {
            assert!(l > 0.0 && l < 2.0);
            assert!(!samples.contains(&l));
        }
    }
    let w = sample_path(r(1, 1), r(1, 64), 1).unwrap();
    let extrema = local_extrema(&w.values());
    let levels = select_nonatom_levels(&extrema, -1.0, 1.0, 5).unwrap();
    assert!(levels.iter().all(|l| !extrema.contains(l)));
}

fn random_bits(seed: u64, rows: u64, cols: u64) -> BitAssignment {
    let mut rng = substream(seed, 0);
    (0..rows)
        .flat_map(|r| (0..cols).map(move |c| Position::new(r, c)))
        .map(|p| (p, rng.random::<bool>()))
        .collect()
}

#[test]
fn isomorphism_round_trips_and_separates() {
    let mut seed = 0;
    for depth in 0..=6u32 {
        for q in 2..=8u32 {
            let cols = (1u64 << depth) * u64::from(q);
            seed += 1;
            let omega = random_bits(seed, 2, cols);
            let w = bits_to_path(&omega, 2, depth, q).unwrap();
            assert_eq!(path_to_bits(&w, 2, depth, q).unwrap(), omega, "L={depth} q={q}");
            // Flip one bit: the path and its decoding both change.
            let flip = Position::new(1, cols - 1);
            let other: BitAssignment = omega.iter().map(|(p, b)| (p, if p == flip { !b } else { b })).collect();
            let w2 = bits_to_path(&other, 2, depth, q).unwrap();
            assert_ne!(w, w2);
            assert_eq!(path_to_bits(&w2, 2, depth, q).unwrap(), other);
        }
    }
}

#[test]
fn converted_uniform_arrays_have_unit_variance_at_one() {
    let values: Vec<f64> = (0..10_000)
        .map(|i| bits_to_path(&random_bits(1_000 + i, 1, 64), 1, 3, 8).unwrap().last())
        .collect();
    let (_, v) = mean_var(&values);
    assert!((v - 1.0).abs() < 0.05, "{v}");
}

#[test]
fn conditional_expectation_tower() {
    // One stage: E f(W). Two stages: E[E_{1/2} f(W)] over random prefixes.
    let f = ClampedTerminal(1.0);
    let h = r(1, 16);
    let n_outer = 400;
    let n_inner = 400;
    let prefixes = sample_paths(r(1, 2), h, 31, n_outer).unwrap();
    let two_stage: f64 = prefixes
        .iter()
        .enumerate()
        .map(|(i, w)| cond_expectation_t(&f, r(1, 2), w, r(1, 1), n_inner, 1_000 + i as u64).unwrap().estimate)
        .sum::<f64>()
        / n_outer as f64;
    let one_stage = cond_expectation_t(&f, r(0, 1), &GridPath::origin(h), r(1, 1), n_outer * n_inner, 7).unwrap();
    let outer_hw = doob_core::brownian::hoeffding_half_width(1.0, n_outer);
    assert!((two_stage - one_stage.estimate).abs() < one_stage.half_width + outer_hw);
}

#[test]
fn extension_does_not_depend_on_the_later_time() {
    let grid = TimeGrid::new(vec![r(0, 1), r(1, 2), r(3, 4), r(1, 1)], false).unwrap();
    let m = Markov::Digital { level: 0.2, maturity: 1.0 };
    let w = sample_path(r(1, 4), r(1, 64), 9).unwrap();
    let a = extend_grid_martingale(&m, &grid, r(1, 4), &w, Some(r(1, 2)), 20_000, 1).unwrap();
    let b = extend_grid_martingale(&m, &grid, r(1, 4), &w, Some(r(1, 1)), 20_000, 2).unwrap();
    assert!((a.estimate - b.estimate).abs() < a.half_width + b.half_width);
    let exact = m.value(&w).unwrap();
    assert!((a.estimate - exact).abs() < a.half_width);
}

#[test]
fn continuous_transforms_keep_the_mean() {
    let n = 10_000;
    let paths = sample_paths(r(1, 1), r(1, 4096), 77, n).unwrap();
    let m: Arc<dyn PathMartingale> = Arc::new(Markov::Exponential);
    let levels = {
        let pilot: Vec<f64> = paths[..200].iter().flat_map(|w| local_extrema(&m.along(w).unwrap())).collect();
        select_nonatom_levels(&pilot, 0.5, 2.0, 2).unwrap()
    };
    let (a, b) = (levels[0].min(levels[1]), levels[0].max(levels[1]));
    let up = ContinuousUpcrossing::new(m.clone(), a, b).unwrap();
    let sv = ContinuousSavings::new(m);
    for t in [&up as &dyn PathMartingale, &sv] {
        let finals: Vec<f64> = paths.iter().map(|w| t.value(w).unwrap()).collect();
        let (mean, var) = mean_var(&finals);
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "{mean} ± {se}");
    }
}

#[test]
fn bounded_functional_of_the_whole_path() {
    // E_0 of the running maximum clamp is the same from either prefix representation.
    let f = FnFunctional {
        bound: Some(1.0),
        f: Arc::new(|w: &GridPath| w.values().iter().fold(0.0f64, |m, x| m.max(x.abs())).min(1.0)),
    };
    assert_eq!(f.bound(), Some(1.0));
    let e = cond_expectation_t(&f, r(0, 1), &GridPath::origin(r(1, 8)), r(1, 1), 2_000, 3).unwrap();
    assert!(e.estimate > 0.0 && e.estimate <= 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_then_concat_is_identity(seed in any::<u64>(), k in 0i64..=32) {
        let w = sample_path(r(1, 2), r(1, 64), seed).unwrap();
        let s = r(k, 64);
        let (head, tail) = w.split(s).unwrap();
        prop_assert_eq!(head.concat(s, &tail).unwrap().values(), w.values());
        prop_assert!(tail.origin_zero());
    }

    #[test]
    fn hitting_time_value_is_the_level(values in proptest::collection::vec(-5.0f64..5.0, 2..30), level in -5.0f64..5.0) {
        if let HitTime::At(t) = hitting_time(&values, 0.5, 0.0, level) {
            let w = GridPath::new(r(1, 2), values.clone()).unwrap();
            prop_assert!((w.at(t) - level).abs() < 1e-9);
        } else {
            let (lo, hi) = values.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            prop_assert!(level < lo || level > hi);
        }
    }
}
