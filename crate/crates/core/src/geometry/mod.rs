//! Points, balls, domains and the covering constructions built on them.
//!
//! Points are plain coordinate slices; dimension is whatever the caller
//! uses consistently (1 to 3 in practice).

mod chain;
mod cover;
mod domain;
mod reflection;

pub use chain::{uniform_chain, ChainConfig, ChainOfBalls};
pub use cover::{
    greedy_disjoint_subcover, whitney_collar_cover, BallCover, CoverRole, WhitneyCover,
    WhitneyReport, BUMP_INNER_FRACTION,
};
pub use domain::{BoundingBox, DomainKind, DomainShape, RemovedSet};
pub use reflection::{lipschitz_reflection, reflect_across_graph, reflection_constant};

use serde::{Deserialize, Serialize};

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Ball { center, radius }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `λB`: same center, radius scaled by `factor`.
    pub fn dilate(&self, factor: f64) -> Ball {
        Ball { center: self.center.clone(), radius: self.radius * factor }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist2(&self.center, x) <= self.radius * self.radius
    }

    /// Closed balls intersect iff the center distance is at most the radius sum.
    pub fn intersects(&self, other: &Ball) -> bool {
        dist(&self.center, &other.center) <= self.radius + other.radius
    }

    /// `self ⊂ other`, checked on centers and radii.
    pub fn is_inside(&self, other: &Ball) -> bool {
        dist(&self.center, &other.center) + self.radius <= other.radius
    }
}

/// The polynomial bump `max(0, 1 - |z|^2)^2`, supported in the closed unit ball.
pub fn bump(z2: f64) -> f64 {
    if z2 >= 1.0 {
        0.0
    } else {
        let s = 1.0 - z2;
        s * s
    }
}

/// `|∇ bump|` as a function of `|z|`: `4|z|(1 - |z|^2)`.
pub fn bump_grad_norm(z: f64) -> f64 {
    if z >= 1.0 {
        0.0
    } else {
        4.0 * z * (1.0 - z * z)
    }
}

/// Maximum of [`bump_grad_norm`], attained at `|z| = 1/sqrt(3)`.
pub const BUMP_GRAD_MAX: f64 = 1.539_600_717_839_002;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilation_fixes_center() {
        let b = Ball::new(vec![1.0, 2.0], 0.5);
        let d = b.dilate(5.0);
        assert_eq!(d.center, b.center);
        assert_eq!(d.radius, 2.5);
    }

    #[test]
    fn bump_gradient_maximum() {
        let z = 1.0 / 3f64.sqrt();
        assert!((bump_grad_norm(z) - BUMP_GRAD_MAX).abs() < 1e-12);
        for k in 0..1000 {
            assert!(bump_grad_norm(k as f64 / 1000.0) <= BUMP_GRAD_MAX + 1e-12);
        }
    }
}
