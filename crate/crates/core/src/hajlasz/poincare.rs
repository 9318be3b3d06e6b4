use serde::{Deserialize, Serialize};

use super::GradientCandidate;
use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::geometry::{dist, Ball};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    /// `inf_c (⨍_B |u − c|^{p*})^{1/p*}`.
    pub oscillation: f64,
    /// `r (⨍_{2B} g^p)^{1/p}`.
    pub gradient_term: f64,
    pub ratio: f64,
    pub p_star: f64,
    /// Nonconstant `u` against a gradient vanishing on `2B`.
    pub infinite: bool,
}

const SEARCH_TOL: f64 = 1e-10;

fn average(pts: &[(f64, f64)], h: impl Fn(f64) -> f64) -> f64 {
    let (s, w) = pts.iter().fold((0.0, 0.0), |(s, w), (m, v)| (s + m * h(*v), w + m));
    s / w
}

/// Sobolev–Poincaré quotient on a ball with `p* = np/(n−p)` (`∞` when
/// `p = n = 1`).
pub fn poincare_ratio(u: &SampledField, g: &GradientCandidate, ball: &Ball, p: f64) -> Result<PoincareReport> {
    let cloud = u.cloud();
    let n = cloud.dim();
    if g.g.len() != u.len() {
        return Err(Error::Parameter("u and g live on different clouds".into()));
    }
    let lower = n as f64 / (n as f64 + 1.0);
    if !(p > lower && p <= 1.0) {
        return Err(Error::Parameter(format!("p must lie in ({lower}, 1], got {p}")));
    }
    let p_star = if p >= n as f64 { f64::INFINITY } else { n as f64 * p / (n as f64 - p) };
    let (mut lo, mut hi) = (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]);
    for x in cloud.points() {
        for k in 0..n {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    let slack = 1e-12 * (1.0 + ball.radius);
    for k in 0..n {
        if ball.center[k] - 2.0 * ball.radius < lo[k] - slack || ball.center[k] + 2.0 * ball.radius > hi[k] + slack {
            return Err(Error::Domain("doubled ball leaves the cloud".into()));
        }
    }
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for (i, x) in cloud.points().iter().enumerate() {
        let d = dist(x, &ball.center);
        let m = cloud.measures()[i];
        if d <= ball.radius {
            inner.push((m, u.values()[i]));
        }
        if d <= 2.0 * ball.radius {
            outer.push((m, g.g.values()[i]));
        }
    }
    if inner.is_empty() {
        return Err(Error::Domain("ball contains no cloud point".into()));
    }
    let umin = inner.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let umax = inner.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let oscillation = if umax == umin {
        0.0
    } else if p_star.is_infinite() {
        (umax - umin) / 2.0
    } else {
        let cost = |c: f64| average(&inner, |v| (v - c).abs().powf(p_star));
        let (mut a, mut b) = (umin, umax);
        while b - a > SEARCH_TOL * (umax - umin) {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if cost(m1) <= cost(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        cost((a + b) / 2.0).powf(1.0 / p_star)
    };
    let gradient_term = ball.radius * average(&outer, |v| v.powf(p)).powf(1.0 / p);
    let (ratio, infinite) = if oscillation == 0.0 {
        (0.0, false)
    } else if gradient_term == 0.0 {
        (f64::INFINITY, true)
    } else {
        (oscillation / gradient_term, false)
    };
    Ok(PoincareReport { oscillation, gradient_term, ratio, p_star, infinite })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::MetricCloud;
    use crate::hajlasz::{canonical_gradient, CanonicalMode, Provenance};

    fn square(k: usize) -> Arc<MetricCloud> {
        Arc::new(MetricCloud::grid_over(&[0.0, 0.0], &[1.0, 1.0], 1.0 / k as f64).unwrap())
    }

    fn user(g: SampledField) -> GradientCandidate {
        GradientCandidate { g, p: 1.0, provenance: Provenance::User, slack: 0.0, feasible: true }
    }

    #[test]
    fn constant_and_zero_gradient() {
        let c = square(16);
        let ball = Ball::new(vec![0.5, 0.5], 0.2);
        let u = SampledField::constant(c.clone(), 1.0);
        let g = user(SampledField::constant(c.clone(), 1.0));
        assert_eq!(poincare_ratio(&u, &g, &ball, 0.9).unwrap().ratio, 0.0);
        let v = SampledField::from_fn(c.clone(), |x| x[0]).unwrap();
        let z = user(SampledField::constant(c, 0.0));
        let r = poincare_ratio(&v, &z, &ball, 0.9).unwrap();
        assert!(r.infinite && r.ratio.is_infinite());
    }

    #[test]
    fn affine_ratio_stable_under_refinement() {
        let ball = Ball::new(vec![0.5, 0.5], 0.2);
        let ratio = |k: usize| {
            let u = SampledField::from_fn(square(k), |x| x[0] + 0.5 * x[1]).unwrap();
            let g = canonical_gradient(&u, CanonicalMode::Global).unwrap();
            poincare_ratio(&u, &g, &ball, 0.9).unwrap().ratio
        };
        let (a, b) = (ratio(16), ratio(32));
        assert!(a.is_finite() && a > 0.0);
        assert!((a / b - 1.0).abs() < 0.2, "{a} vs {b}");
    }

    #[test]
    fn dilation_invariance() {
        let c = square(16);
        let u = SampledField::from_fn(c.clone(), |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let g = SampledField::from_fn(c.clone(), |x| 1.0 + x[0]).unwrap();
        let ball = Ball::new(vec![0.5, 0.5], 0.2);
        let r1 = poincare_ratio(&u, &user(g.clone()), &ball, 0.8).unwrap().ratio;
        let lam = 3.0;
        let big = Arc::new(c.dilate(lam));
        let u2 = SampledField::new(big.clone(), u.values().to_vec()).unwrap();
        let g2 = SampledField::new(big, g.values().iter().map(|v| v / lam).collect()).unwrap();
        let r2 = poincare_ratio(&u2, &user(g2), &Ball::new(vec![1.5, 1.5], 0.6), 0.8).unwrap().ratio;
        assert!((r1 / r2 - 1.0).abs() < 1e-8, "{r1} vs {r2}");
    }

    #[test]
    fn one_dimensional_sup_norm_case() {
        let c = Arc::new(MetricCloud::grid(vec![0.0], 0.125, vec![9]).unwrap());
        let u = SampledField::from_fn(c.clone(), |x| x[0]).unwrap();
        let g = user(SampledField::constant(c, 1.0));
        let r = poincare_ratio(&u, &g, &Ball::new(vec![0.5], 0.25), 1.0).unwrap();
        assert!(r.p_star.is_infinite());
        assert!((r.oscillation - 0.25).abs() < 1e-15);
        assert!((r.ratio - 1.0).abs() < 1e-15);
        assert!(poincare_ratio(&u, &g, &Ball::new(vec![0.5], 0.3), 1.0).is_err());
        assert!(poincare_ratio(&u, &g, &Ball::new(vec![0.5], 0.25), 0.4).is_err());
    }
}
