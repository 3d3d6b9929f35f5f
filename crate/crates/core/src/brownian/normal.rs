//! Standard normal CDF and quantile.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::{PI, SQRT_2};

/// `Φ(z)`.
pub fn phi(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// `Φ^{-1}(u)` for `0 < u < 1`.
pub fn inv_phi(u: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * u)
}

/// Standard normal density.
pub fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}
