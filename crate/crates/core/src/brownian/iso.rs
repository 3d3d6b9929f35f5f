//! A concrete bit-array ↔ path map: each row of bits drives one unit of time
//! through a quantized Lévy–Ciesielski (midpoint) construction, and the rows
//! are concatenated.
//!
//! Row `r` is read in blocks of `q` bits. Block `j` is a number `k` in
//! `0..2^q` (most significant bit first) and stands for the Gaussian
//! `Φ^{-1}((k + ½)/2^q)`. Block 0 sets `W_1`; the next `2^l` blocks set the
//! midpoints of the `2^l` intervals of length `2^{-l}`, for `l = 0..L-1`.
//! So a row uses `2^L·q` bits and the path lives on the grid `2^{-L}`.

use super::normal::{inv_phi, phi};
use super::path::GridPath;
use super::BrownianError;
use crate::bitspace::{BitAssignment, Position};
use num::rational::Rational64;

fn check(depth: u32, q: u32) -> Result<(), BrownianError> {
    if !(2..=16).contains(&q) {
        return Err(BrownianError::BadQuantization(q));
    }
    if depth > 20 {
        return Err(BrownianError::DepthTooLarge(depth));
    }
    Ok(())
}

fn dequantize(k: u64, q: u32) -> f64 {
    inv_phi((k as f64 + 0.5) / (1u64 << q) as f64)
}

fn quantize(z: f64, q: u32) -> u64 {
    let n = 1u64 << q;
    ((phi(z) * n as f64).floor().max(0.0) as u64).min(n - 1)
}

/// Visits the coefficients of one row in construction order: the endpoint,
/// then each midpoint `(left, mid, right, σ)` level by level.
fn midpoints(depth: u32) -> impl Iterator<Item = (usize, usize, usize, f64)> {
    (0..depth).flat_map(move |l| {
        let width = 1usize << (depth - l);
        let sigma = (0.5f64).powf(f64::from(l) / 2.0) / 2.0;
        (0..1usize << l).map(move |i| (i * width, i * width + width / 2, (i + 1) * width, sigma))
    })
}

/// Path on `[0, rows]` built from the first `rows` rows of `omega`. Missing
/// bits read as 0.
pub fn bits_to_path(omega: &BitAssignment, rows: u64, depth: u32, q: u32) -> Result<GridPath, BrownianError> {
    check(depth, q)?;
    let dt = Rational64::new(1, 1i64 << depth);
    let n = 1usize << depth;
    let mut path = GridPath::origin(dt);
    for r in 0..rows {
        let mut block = 0u64;
        let mut z = || {
            let k = (0..q).fold(0u64, |k, i| {
                let bit = omega.get(&Position::new(r, block * u64::from(q) + u64::from(i)));
                (k << 1) | u64::from(bit.unwrap_or(false))
            });
            block += 1;
            dequantize(k, q)
        };
        let mut v = vec![0.0; n + 1];
        v[n] = z();
        for (left, mid, right, sigma) in midpoints(depth) {
            v[mid] = 0.5 * (v[left] + v[right]) + sigma * z();
        }
        let piece = GridPath::new(dt, v)?;
        path = path.concat(Rational64::from_integer(r as i64), &piece)?;
    }
    Ok(path)
}

/// Left inverse of [`bits_to_path`] on its range: recovers every block of
/// the first `rows` rows.
pub fn path_to_bits(w: &GridPath, rows: u64, depth: u32, q: u32) -> Result<BitAssignment, BrownianError> {
    check(depth, q)?;
    let dt = Rational64::new(1, 1i64 << depth);
    if w.dt() != dt || w.horizon() < Rational64::from_integer(rows as i64) {
        return Err(BrownianError::IncompatibleGrid);
    }
    let n = 1usize << depth;
    let mut out = BitAssignment::new();
    for r in 0..rows {
        let start = r as usize * n;
        let v: Vec<f64> = (0..=n).map(|i| w.value(start + i) - w.value(start)).collect();
        let mut ks = vec![quantize(v[n], q)];
        for (left, mid, right, sigma) in midpoints(depth) {
            ks.push(quantize((v[mid] - 0.5 * (v[left] + v[right])) / sigma, q));
        }
        for (j, k) in ks.into_iter().enumerate() {
            for i in 0..q {
                let col = j as u64 * u64::from(q) + u64::from(i);
                out.insert(Position::new(r, col), (k >> (q - 1 - i)) & 1 == 1)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{BitSource, ScenarioSource};

    fn random_array(seed: u64, rows: u64, cols: u64) -> BitAssignment {
        let mut src = ScenarioSource::uniform(seed).open().unwrap().sample(0);
        (0..rows)
            .flat_map(|r| (0..cols).map(move |c| Position::new(r, c)))
            .map(|p| (p, src.bit(p)))
            .collect()
    }

    #[test]
    fn round_trip_small() {
        for (depth, q) in [(0, 2), (1, 3), (3, 8), (6, 5)] {
            let cols = (1u64 << depth) * u64::from(q);
            let omega = random_array(u64::from(depth * 10 + q), 2, cols);
            let w = bits_to_path(&omega, 2, depth, q).unwrap();
            assert_eq!(w.steps(), 2 << depth);
            assert_eq!(path_to_bits(&w, 2, depth, q).unwrap(), omega);
        }
    }

    #[test]
    fn zero_bits_give_the_all_low_path() {
        let w = bits_to_path(&BitAssignment::new(), 1, 2, 3).unwrap();
        // Every block is k = 0, i.e. z = Φ^{-1}(1/16).
        let z = inv_phi(1.0 / 16.0);
        assert!((w.value(4) - z).abs() < 1e-15);
        assert!((w.value(2) - (z / 2.0 + z / 2.0)).abs() < 1e-15);
        assert_eq!(w, bits_to_path(&BitAssignment::new(), 1, 2, 3).unwrap());
    }

    #[test]
    fn zero_path_decodes_to_one_half() {
        let w = GridPath::new(Rational64::new(1, 4), vec![0.0; 5]).unwrap();
        let bits = path_to_bits(&w, 1, 2, 3).unwrap();
        // Φ(0) = 1/2 → block 100.
        for j in 0..4 {
            let block: Vec<bool> = (0..3).map(|i| bits.get(&Position::new(0, j * 3 + i)).unwrap()).collect();
            assert_eq!(block, vec![true, false, false]);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(bits_to_path(&BitAssignment::new(), 1, 2, 1).is_err());
        let w = GridPath::new(Rational64::new(1, 2), vec![0.0; 3]).unwrap();
        assert!(path_to_bits(&w, 1, 2, 3).is_err());
    }
}
