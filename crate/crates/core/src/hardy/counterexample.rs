//! `u(x) = 1/log(1/x)` on `(h_min, 1/e)`: bounded total variation, while
//! `∫ |u(x)|/x dx = log log(1/h_min)` diverges as `h_min → 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogCounterexample {
    pub h_min: f64,
    pub nodes: usize,
    /// Log-spacing of the geometric grid.
    pub delta: f64,
    /// `Σ |u(x_{i+1}) − u(x_i)|`, the discrete `‖u′‖_{L¹}`.
    pub derivative_l1: f64,
    /// `1 − 1/log(1/h_min)`.
    pub derivative_l1_exact: f64,
    /// `Σ u(x_i)/x_i (x_{i+1} − x_i)` over increasing nodes.
    pub hardy_sum: f64,
    /// `log log(1/h_min)`.
    pub hardy_integral: f64,
    pub u_top: f64,
}

pub const DEFAULT_DELTA: f64 = 1e-3;

pub fn log_counterexample(h_min: f64) -> Result<LogCounterexample> {
    log_counterexample_with(h_min, DEFAULT_DELTA)
}

/// Geometric grid `x_j = exp(−1 − jδ)` ending exactly at `h_min`, with `δ`
/// rounded down so that the range is an integer number of steps.
pub fn log_counterexample_with(h_min: f64, delta: f64) -> Result<LogCounterexample> {
    let top = (-2f64).exp();
    if !(h_min > 0.0 && h_min < top) {
        return Err(Error::Parameter(format!("h_min must lie in (0, e^-2), got {h_min}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Parameter("grid step must be positive".into()));
    }
    let big_l = (1.0 / h_min).ln();
    let steps = ((big_l - 1.0) / delta).ceil() as usize;
    let delta = (big_l - 1.0) / steps as f64;
    // t = log(1/x) runs from L down to 1, so x increases
    let ts: Vec<f64> = (0..=steps).map(|j| big_l - j as f64 * delta).collect();
    let u = |t: f64| 1.0 / t;
    let xs: Vec<f64> = ts.iter().map(|t| (-t).exp()).collect();
    let mut derivative_l1 = 0.0;
    let mut hardy_sum = 0.0;
    for j in 0..steps {
        derivative_l1 += (u(ts[j + 1]) - u(ts[j])).abs();
        hardy_sum += u(ts[j]) / xs[j] * (xs[j + 1] - xs[j]);
    }
    Ok(LogCounterexample {
        h_min,
        nodes: steps + 1,
        delta,
        derivative_l1,
        derivative_l1_exact: 1.0 - 1.0 / big_l,
        hardy_sum,
        hardy_integral: big_l.ln(),
        u_top: u(ts[steps]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_checked() {
        assert!(log_counterexample(0.2).is_err());
        assert!(log_counterexample(0.0).is_err());
        assert!(log_counterexample_with(1e-3, 0.0).is_err());
    }

    #[test]
    fn top_value_and_variation() {
        for k in [4, 8, 16] {
            let r = log_counterexample((-(k as f64)).exp()).unwrap();
            assert!((r.u_top - 1.0).abs() < 1e-12);
            assert!((r.derivative_l1 - (1.0 - 1.0 / k as f64)).abs() < 1e-12);
            assert!(r.derivative_l1 < 1.0);
        }
    }

    #[test]
    fn sums_track_the_double_logarithm() {
        let mut prev = 0.0;
        for k in [4.0f64, 8.0, 16.0, 32.0] {
            let r = log_counterexample((-k).exp()).unwrap();
            assert!(r.hardy_sum > prev);
            // left-point sums of a decreasing integrand sit slightly above it
            assert!(r.hardy_sum >= r.hardy_integral && r.hardy_sum - r.hardy_integral < r.delta * r.hardy_integral, "{r:?}");
            prev = r.hardy_sum;
        }
        let (a, b) = (log_counterexample((-4f64).exp()).unwrap(), log_counterexample((-16f64).exp()).unwrap());
        assert!(b.hardy_sum / a.hardy_sum >= 2.0);
    }
}
