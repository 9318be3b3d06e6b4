//! Hardy inequalities, Hausdorff content and condenser capacity.

mod capacity;
mod content;
mod counterexample;
pub mod sets;

pub use capacity::{fatness_probe, hardy_capacity, CapacityEstimate, FatnessOptions, FatnessReport, FatnessSample};
pub use content::{hausdorff_content, ContentEstimate};
pub use counterexample::{log_counterexample, log_counterexample_with, LogCounterexample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{power_maximal_composite, RadiusLadder, SampledField};
use crate::geometry::{dist, lipschitz_reflection, reflection_constant, Ball, DomainShape};
use crate::hajlasz::GradientCandidate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyQuotient {
    /// `Σ w_i (|u_i| / d(x_i, ∂Ω))^p` over the domain points.
    pub numerator: f64,
    /// `Σ w_i g_i^p` over the whole cloud.
    pub denominator: f64,
    /// `∞` when only the denominator vanishes, 0 for `u ≡ 0`.
    pub ratio: f64,
}

/// Discrete Hardy quotient of `u` (zero outside `Ω`) against the gradient
/// candidate `g`.
pub fn hardy_quotient_ratio(
    u: &SampledField,
    g: &GradientCandidate,
    domain: &DomainShape,
    p: f64,
) -> Result<HardyQuotient> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("exponent must be positive, got {p}")));
    }
    let cloud = u.cloud();
    if g.g.len() != u.len() {
        return Err(Error::Parameter("u and g live on different clouds".into()));
    }
    let mut numerator = 0.0;
    for (i, x) in cloud.points().iter().enumerate() {
        let v = u.values()[i].abs();
        if v == 0.0 {
            continue;
        }
        if !domain.contains(x) {
            return Err(Error::Precondition(format!("u does not vanish at {x:?} outside the domain")));
        }
        let d = domain.distance_to_boundary(x)?;
        if d == 0.0 {
            return Err(Error::Precondition(format!("u does not vanish at boundary point {x:?}")));
        }
        numerator += cloud.measures()[i] * (v / d).powf(p);
    }
    let denominator: f64 = g.g.values().iter().zip(cloud.measures()).map(|(v, m)| m * v.abs().powf(p)).sum();
    let ratio = match (numerator == 0.0, denominator == 0.0) {
        (true, _) => 0.0,
        (false, true) => f64::INFINITY,
        _ => numerator / denominator,
    };
    Ok(HardyQuotient { numerator, denominator, ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionPoint {
    pub index: usize,
    /// Cloud point nearest to the reflected position `H(x)`.
    pub image: usize,
    pub distance: f64,
    pub u: f64,
    /// `|u(x) − u(x̃)|` with `x̃` the image sample.
    pub difference: f64,
    /// `|u(x)| / (d(x, ∂Ω)(g(x) + g(x̃)))`; `None` for 0/0.
    pub c1: Option<f64>,
    /// `|x − x̃| / d(x, ∂Ω)`, the discrete counterpart of the geometric constant.
    pub discrete_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub points: Vec<ReflectionPoint>,
    pub max_c1: f64,
    /// `c₁` with `|x − H(x)| ≤ c₁ d(x, ∂Ω)` from the Lipschitz constant.
    pub geometric_c1: f64,
    /// Points whose reflection leaves the window or the cloud hull.
    pub skipped: usize,
    /// True when `u` vanishes at every cloud point outside the domain.
    pub vanishes_outside: bool,
}

/// Compares `|u(x)|` with `d(x,∂Ω)(g(x) + g(H(x)))` at domain points within
/// `collar` of the boundary of a Lipschitz-graph domain.
pub fn reflection_hardy_check(
    u: &SampledField,
    domain: &DomainShape,
    g: &GradientCandidate,
    collar: f64,
) -> Result<ReflectionReport> {
    let geometric_c1 = reflection_constant(domain)
        .ok_or_else(|| Error::Domain("reflection check needs a Lipschitz-graph domain".into()))?;
    let cloud = u.cloud();
    if g.g.len() != u.len() {
        return Err(Error::Parameter("u and g live on different clouds".into()));
    }
    let n = cloud.dim();
    let (mut lo, mut hi) = (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]);
    for x in cloud.points() {
        for k in 0..n {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    let mut rep = ReflectionReport { points: Vec::new(), max_c1: 0.0, geometric_c1, skipped: 0, vanishes_outside: true };
    for (i, x) in cloud.points().iter().enumerate() {
        if !domain.contains(x) {
            if u.values()[i] != 0.0 {
                rep.vanishes_outside = false;
            }
            continue;
        }
        let d = domain.distance_to_boundary(x)?;
        if d > collar || d == 0.0 {
            continue;
        }
        let Ok(h) = lipschitz_reflection(domain, x) else {
            rep.skipped += 1;
            continue;
        };
        if (0..n).any(|k| h[k] < lo[k] || h[k] > hi[k]) {
            rep.skipped += 1;
            continue;
        }
        let j = cloud.nearest(&h).expect("nonempty cloud");
        let ux = u.values()[i];
        let den = d * (g.g.values()[i] + g.g.values()[j]);
        let c1 = if den > 0.0 {
            Some(ux.abs() / den)
        } else if ux == 0.0 {
            None
        } else {
            Some(f64::INFINITY)
        };
        if let Some(c) = c1 {
            rep.max_c1 = rep.max_c1.max(c);
        }
        rep.points.push(ReflectionPoint {
            index: i,
            image: j,
            distance: d,
            u: ux,
            difference: (ux - u.values()[j]).abs(),
            c1,
            discrete_bound: dist(x, cloud.point(j)) / d,
        });
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseBound {
    pub index: usize,
    pub u: f64,
    /// `(M(g^q))^{1/q}` at the point.
    pub maximal: f64,
    pub ratio: f64,
    /// Averages of `u` over `B(x, r 2^{-j})`, `j = 0, 1, …` down to the
    /// sample spacing.
    pub chain: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseBoundReport {
    /// `max_{x ∈ B} |u(x)| / (r (M(g^q)(x))^{1/q})`.
    pub c_hat: f64,
    pub infinite: bool,
    pub points: Vec<PointwiseBound>,
}

/// Empirical constant of `|u(x)| ≤ c r (M(g^q)(x))^{1/q}` on a ball, for `u`
/// vanishing on the sample set `k ⊂ B`.
pub fn capacity_pointwise_bound_check(
    u: &SampledField,
    k: &[usize],
    ball: &Ball,
    g: &SampledField,
    q: f64,
) -> Result<PointwiseBoundReport> {
    let cloud = u.cloud();
    if g.len() != u.len() {
        return Err(Error::Parameter("u and g live on different clouds".into()));
    }
    if k.is_empty() {
        return Err(Error::Precondition("the zero set K is empty".into()));
    }
    for &i in k {
        if i >= u.len() || !ball.contains(cloud.point(i)) {
            return Err(Error::Precondition(format!("K point {i} is not a sample inside the ball")));
        }
        if u.values()[i] != 0.0 {
            return Err(Error::Precondition(format!("u does not vanish at K point {i}")));
        }
    }
    let m = power_maximal_composite(g, q, RadiusLadder::default_for(cloud))?;
    let r = ball.radius;
    let finest = cloud.spacing().unwrap_or(r / 64.0);
    let mut rep = PointwiseBoundReport { c_hat: 0.0, infinite: false, points: Vec::new() };
    for (i, x) in cloud.points().iter().enumerate() {
        if !ball.contains(x) {
            continue;
        }
        let v = u.values()[i].abs();
        let mx = m.values()[i];
        let ratio = if v == 0.0 {
            0.0
        } else if mx == 0.0 {
            rep.infinite = true;
            f64::INFINITY
        } else {
            v / (r * mx)
        };
        rep.c_hat = rep.c_hat.max(ratio);
        let mut chain = Vec::new();
        let mut t = r;
        while t >= finest {
            let (mut s, mut w) = (0.0, 0.0);
            for (j, y) in cloud.points().iter().enumerate() {
                if dist(x, y) <= t {
                    s += cloud.measures()[j] * u.values()[j];
                    w += cloud.measures()[j];
                }
            }
            chain.push(s / w);
            t /= 2.0;
        }
        rep.points.push(PointwiseBound { index: i, u: u.values()[i], maximal: mx, ratio, chain });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::MetricCloud;
    use crate::geometry::BoundingBox;
    use crate::hajlasz::{
        build_constraints, canonical_gradient, CanonicalMode, ConstraintMode, Provenance,
    };
    use crate::lp::solve_min_gradient_p1;

    fn user(g: SampledField) -> GradientCandidate {
        GradientCandidate { g, p: 1.0, provenance: Provenance::User, slack: 0.0, feasible: true }
    }

    fn lp_minimal(u: &SampledField, radius: f64) -> GradientCandidate {
        let cs = build_constraints(u, &ConstraintMode::Scale { radius }).unwrap();
        let sol = solve_min_gradient_p1(&cs.to_lp(u.cloud().measures()).unwrap(), 1e-10).unwrap();
        let g = u.with_values(sol.primal).unwrap();
        GradientCandidate::new(u, g, 1.0, Provenance::LpMinimal, &cs).unwrap()
    }

    fn square_cloud(res: usize) -> Arc<MetricCloud> {
        Arc::new(MetricCloud::grid_over(&[-0.25, -0.25], &[1.25, 1.25], 1.0 / res as f64).unwrap())
    }

    #[test]
    fn zero_field_has_zero_quotient() {
        let c = square_cloud(8);
        let dom = DomainShape::unit_square(0.5);
        let u = SampledField::constant(c.clone(), 0.0);
        let q = hardy_quotient_ratio(&u, &user(SampledField::constant(c, 0.0)), &dom, 1.0).unwrap();
        assert_eq!(q.ratio, 0.0);
    }

    #[test]
    fn support_outside_domain_rejected() {
        let c = square_cloud(8);
        let dom = DomainShape::unit_square(0.5);
        let u = SampledField::constant(c.clone(), 1.0);
        let g = user(SampledField::constant(c, 1.0));
        assert!(matches!(hardy_quotient_ratio(&u, &g, &dom, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn boundary_distance_quotient() {
        let res = 8;
        let c = square_cloud(res);
        let dom = DomainShape::unit_square(0.5);
        let u = SampledField::from_fn(c.clone(), |x| {
            if dom.contains(x) { dom.distance_to_boundary(x).unwrap() } else { 0.0 }
        })
        .unwrap();
        let g = lp_minimal(&u, 2.5 / res as f64);
        let q = hardy_quotient_ratio(&u, &g, &dom, 1.0).unwrap();
        // |u|/d = 1 on the interior samples: numerator is their measure
        let inner = c.points().iter().filter(|x| dom.contains(x)).count() as f64;
        assert!((q.numerator - inner * c.measures()[0]).abs() < 1e-12);
        assert!(q.numerator <= 1.0 && q.ratio.is_finite() && q.ratio > 0.0);
    }

    #[test]
    fn lp_denominator_gives_the_larger_quotient() {
        let c = square_cloud(8);
        let dom = DomainShape::unit_square(0.5);
        let u = SampledField::from_fn(c.clone(), |x| {
            let b = (x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])).max(0.0);
            if dom.contains(x) { b * b * 16.0 } else { 0.0 }
        })
        .unwrap();
        let can = canonical_gradient(&u, CanonicalMode::Global).unwrap();
        assert!(can.feasible);
        let lp = lp_minimal(&u, f64::INFINITY);
        let (a, b) = (
            hardy_quotient_ratio(&u, &lp, &dom, 1.0).unwrap(),
            hardy_quotient_ratio(&u, &can, &dom, 1.0).unwrap(),
        );
        assert!(a.ratio >= b.ratio, "{a:?} {b:?}");
    }

    fn flat_graph() -> DomainShape {
        DomainShape::lipschitz_graph(-1.0, 1.0, vec![0.0; 3], 0.0, BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]))
            .unwrap()
    }

    fn graph_cloud() -> Arc<MetricCloud> {
        Arc::new(MetricCloud::grid_over(&[-1.0, -1.0], &[1.0, 1.0], 0.0625).unwrap())
    }

    #[test]
    fn reflection_zero_field() {
        let c = graph_cloud();
        let u = SampledField::constant(c.clone(), 0.0);
        let rep = reflection_hardy_check(&u, &flat_graph(), &user(SampledField::constant(c, 0.0)), 0.5).unwrap();
        assert_eq!(rep.max_c1, 0.0);
        assert!(rep.points.iter().all(|p| p.c1.is_none()) && !rep.points.is_empty());
    }

    #[test]
    fn flat_reflection_of_odd_field() {
        let c = graph_cloud();
        let u = SampledField::from_fn(c.clone(), |x| x[1] * (1.0 + x[0] * x[0])).unwrap();
        let rep = reflection_hardy_check(&u, &flat_graph(), &user(SampledField::constant(c, 1.0)), 0.5).unwrap();
        assert!(!rep.vanishes_outside);
        for p in &rep.points {
            assert_eq!(p.difference, 2.0 * p.u.abs());
            assert_eq!(p.discrete_bound, 2.0);
        }
    }

    #[test]
    fn bump_in_graph_domain_respects_geometric_constant() {
        let bbox = BoundingBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let dom = DomainShape::lipschitz_graph(-1.0, 1.0, vec![0.0, 0.25, 0.0, 0.25, 0.0], 0.5, bbox).unwrap();
        let c = Arc::new(MetricCloud::grid_over(&[-1.0, -1.0], &[1.0, 1.0], 0.125).unwrap());
        let u = SampledField::from_fn(c.clone(), |x| {
            if !dom.contains(x) {
                return 0.0;
            }
            let r2 = x[0] * x[0] + (x[1] + 0.2) * (x[1] + 0.2);
            if r2 < 0.36 { (1.0 - r2 / 0.36).powi(2) } else { 0.0 }
        })
        .unwrap();
        let g = lp_minimal(&u, f64::INFINITY);
        let rep = reflection_hardy_check(&u, &dom, &g, 0.5).unwrap();
        assert!(rep.vanishes_outside && rep.points.len() > 10);
        for p in &rep.points {
            if let Some(c1) = p.c1 {
                // the image sample carries u = 0, so feasibility gives c1 ≤ |x − x̃|/d
                if u.values()[p.image] == 0.0 {
                    assert!(c1 <= p.discrete_bound + 1e-9, "{p:?}");
                }
            }
        }
        assert!(rep.geometric_c1 > 2.0);
    }

    fn thick_square_setup(res: usize) -> (SampledField, Vec<usize>, Ball, SampledField) {
        let c = Arc::new(MetricCloud::grid_over(&[-1.0, -1.0], &[1.0, 1.0], 1.0 / res as f64).unwrap());
        let inside = |x: &[f64]| x[0].abs() <= 0.25 && x[1].abs() <= 0.25;
        let u = SampledField::from_fn(c.clone(), |x| {
            let dx = (x[0].abs() - 0.25).max(0.0);
            let dy = (x[1].abs() - 0.25).max(0.0);
            (dx * dx + dy * dy).sqrt()
        })
        .unwrap();
        let ball = Ball::new(vec![0.0, 0.0], 0.5);
        let k: Vec<usize> = (0..c.len()).filter(|&i| inside(c.point(i))).collect();
        let g = canonical_gradient(&u, CanonicalMode::Global).unwrap().g;
        (u, k, ball, g)
    }

    #[test]
    fn pointwise_bound_zero_and_thick_square() {
        let (u, k, ball, g) = thick_square_setup(16);
        let zero = u.map(|_| 0.0);
        let rep0 = capacity_pointwise_bound_check(&zero, &k, &ball, &g, 0.8).unwrap();
        assert_eq!(rep0.c_hat, 0.0);
        let rep = capacity_pointwise_bound_check(&u, &k, &ball, &g, 0.8).unwrap();
        assert!(rep.c_hat.is_finite() && rep.c_hat > 0.0 && !rep.infinite);
        let (u2, k2, ball2, g2) = thick_square_setup(32);
        let rep2 = capacity_pointwise_bound_check(&u2, &k2, &ball2, &g2, 0.8).unwrap();
        assert!((rep2.c_hat / rep.c_hat - 1.0).abs() < 0.3, "{} vs {}", rep.c_hat, rep2.c_hat);
        let p = rep.points.iter().find(|p| p.u > 0.0).unwrap();
        assert!(p.chain.len() >= 3);
    }

    #[test]
    fn pointwise_bound_flags() {
        let (u, k, ball, g) = thick_square_setup(8);
        let zero_g = g.map(|_| 0.0);
        assert!(capacity_pointwise_bound_check(&u, &k, &ball, &zero_g, 0.8).unwrap().infinite);
        let bad: Vec<usize> = (0..u.len()).filter(|&i| u.values()[i] > 0.0).take(1).collect();
        assert!(capacity_pointwise_bound_check(&u, &bad, &ball, &g, 0.8).is_err());
    }
}
