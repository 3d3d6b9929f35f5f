//! Numerics for the bounded-looking functional whose conditional
//! expectation at `W_1 = 0` diverges.
//!
//! With `α(y) = e^{y²/2}` and
//! `g(x, y) = exp((−(xα(y))² + x² + y²)/2)`, the weighted integrand is
//! `g(x,y)n(x)n(y) = exp(−x²e^{y²}/2)/(2π)`, while along `x = 0` the inner
//! integrand `g(0,y)n(y)` is the constant `1/√(2π)`.

use super::quadrature::gk15_adaptive;
use super::BrownianError;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemarkReport {
    #[serde(rename = "R")]
    pub radius: f64,
    pub total_integral: f64,
    pub inner_at_zero: f64,
    pub residual: f64,
}

const MAX_INTERVALS: usize = 2000;

fn log_weighted(x: f64, y: f64) -> f64 {
    // x²e^{y²} formed in log space so that x = 0 gives 0 for every y.
    let spread = (2.0 * x.abs().ln() + y * y).exp();
    -0.5 * spread - (2.0 * PI).ln()
}

fn log_inner_at_zero(y: f64) -> f64 {
    let log_g = 0.5 * y * y;
    (log_g - 0.5 * y * y) - 0.5 * (2.0 * PI).ln()
}

/// Breakpoints at 0 and at geometric multiples of the inner peak width
/// `e^{−y²/2}`, so the quadrature sees the peak at every `y`.
fn inner_breaks(y: f64, radius: f64) -> Vec<f64> {
    let width = (-0.5 * y * y).exp();
    let mut out = vec![0.0];
    let mut s = width;
    while s < radius && s > 0.0 {
        out.push(s);
        out.push(-s);
        s *= 4.0;
    }
    out
}

/// `∬_{[−R,R]²} g(x,y)n(x)n(y) dx dy` and `∫_{−R}^{R} g(0,y)n(y) dy` by
/// nested adaptive quadrature to absolute tolerance `tol`.
pub fn remark_counterexample(radius: f64, tol: f64) -> Result<RemarkReport, BrownianError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(BrownianError::BadRadius);
    }
    let inner_tol = tol / (4.0 * radius);
    let inner_residual = std::cell::Cell::new(0.0f64);
    let outer = gk15_adaptive(
        |y| {
            let q = gk15_adaptive(
                |x| log_weighted(x, y).exp(),
                -radius,
                radius,
                &inner_breaks(y, radius),
                inner_tol,
                MAX_INTERVALS,
            );
            inner_residual.set(inner_residual.get().max(q.error));
            q.value
        },
        -radius,
        radius,
        &[0.0],
        tol / 2.0,
        MAX_INTERVALS,
    );
    let zero = gk15_adaptive(|y| log_inner_at_zero(y).exp(), -radius, radius, &[], tol, MAX_INTERVALS);
    let residual = outer.error + 2.0 * radius * inner_residual.get() + zero.error;
    if !(outer.converged && zero.converged) || residual > tol {
        return Err(BrownianError::NotConverged {
            value: outer.value,
            residual,
        });
    }
    Ok(RemarkReport {
        radius,
        total_integral: outer.value,
        inner_at_zero: zero.value,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_integrand_is_constant() {
        for y in [0.0, 1.0, 7.5, 800.0] {
            assert!((log_inner_at_zero(y).exp() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-16);
        }
    }

    #[test]
    fn weighted_integrand_at_origin_column() {
        assert_eq!(log_weighted(0.0, 800.0).exp(), 1.0 / (2.0 * PI));
        assert_eq!(log_weighted(0.5, 800.0).exp(), 0.0);
    }

    #[test]
    fn small_radius() {
        let r = remark_counterexample(1.0, 1e-9).unwrap();
        assert!((r.inner_at_zero - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!(r.total_integral > 0.0 && r.total_integral < 1.0);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(remark_counterexample(0.0, 1e-9).is_err());
    }
}
