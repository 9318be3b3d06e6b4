//! Hausdorff content `H^s_∞(E) = inf Σ r_k^s` (normalization 1) of finite
//! sample sets, with covering radii bounded below by the smallest ladder
//! radius — without that floor the content of a finite set is 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, dist2, Ball};

/// The estimator keeps the full distance matrix.
pub const MAX_POINTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentEstimate {
    pub s: f64,
    /// `Σ r_k^s` of `cover`, which is checked to contain every point.
    pub upper: f64,
    /// `max(box_count, mass)`.
    pub lower: f64,
    pub box_count: f64,
    pub mass: f64,
    pub cover: Vec<Ball>,
    /// Covers are restricted to radii at least this large.
    pub min_radius: f64,
    pub points: usize,
}

impl ContentEstimate {
    fn empty(s: f64, min_radius: f64) -> Self {
        ContentEstimate { s, upper: 0.0, lower: 0.0, box_count: 0.0, mass: 0.0, cover: Vec::new(), min_radius, points: 0 }
    }

    /// Estimate for `E ∪ F` from the two covers; the lower bound is the
    /// larger one by monotonicity.
    pub fn union(&self, other: &ContentEstimate) -> Result<ContentEstimate> {
        if self.s != other.s || self.min_radius != other.min_radius {
            return Err(Error::Parameter("estimates use different exponents or radius floors".into()));
        }
        let mut cover = self.cover.clone();
        cover.extend(other.cover.iter().cloned());
        Ok(ContentEstimate {
            s: self.s,
            upper: self.upper + other.upper,
            lower: self.lower.max(other.lower),
            box_count: self.box_count.max(other.box_count),
            mass: self.mass.max(other.mass),
            cover,
            min_radius: self.min_radius,
            points: self.points + other.points,
        })
    }
}

/// Upper bound: the cheaper of a greedy ladder cover and a single enclosing
/// ball. Lower bounds: dyadic box counting, and the mass-distribution bound
/// for the uniform measure on the samples.
pub fn hausdorff_content(points: &[Vec<f64>], s: f64, ladder: &[f64]) -> Result<ContentEstimate> {
    if !(s > 0.0) {
        return Err(Error::Parameter(format!("content exponent must be positive, got {s}")));
    }
    let mut ladder: Vec<f64> = ladder.to_vec();
    if ladder.is_empty() || ladder.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Parameter("ladder radii must be positive and finite".into()));
    }
    ladder.sort_by(f64::total_cmp);
    ladder.dedup();
    let r_min = ladder[0];
    if points.is_empty() {
        return Ok(ContentEstimate::empty(s, r_min));
    }
    let n = points[0].len();
    let m = points.len();
    if m > MAX_POINTS {
        return Err(Error::Size { vars: m, limit: MAX_POINTS });
    }
    let dmat: Vec<Vec<f64>> =
        points.par_iter().map(|p| points.iter().map(|q| dist(p, q)).collect()).collect();
    let diam = dmat.iter().flatten().cloned().fold(0.0, f64::max);

    // single ball: best center among the samples and their centroid
    let centroid: Vec<f64> = (0..n).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / m as f64).collect();
    let mut single = Ball::new(centroid.clone(), points.iter().map(|p| dist(p, &centroid)).fold(0.0, f64::max));
    for (i, row) in dmat.iter().enumerate() {
        let r = row.iter().cloned().fold(0.0, f64::max);
        if r < single.radius {
            single = Ball::new(points[i].clone(), r);
        }
    }
    // a few ulps so that the squared-distance test in `contains` agrees
    single.radius = (single.radius * (1.0 + 8.0 * f64::EPSILON)).max(r_min);

    // greedy: most isolated points first, each covered by the ladder radius
    // with the lowest cost per newly covered point
    let isolation: Vec<f64> = dmat
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, d)| *d).fold(f64::INFINITY, f64::min))
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| isolation[b].total_cmp(&isolation[a]).then(a.cmp(&b)));
    let mut covered = vec![false; m];
    let mut greedy = Vec::new();
    for &i in &order {
        if covered[i] {
            continue;
        }
        // membership exactly as `Ball::contains` decides it
        let d2: Vec<f64> = points.iter().map(|q| dist2(&points[i], q)).collect();
        let mut best = (f64::INFINITY, r_min);
        for &r in &ladder {
            let fresh = (0..m).filter(|&j| !covered[j] && d2[j] <= r * r).count();
            let cost = r.powf(s) / fresh as f64;
            if cost < best.0 {
                best = (cost, r);
            }
        }
        for j in 0..m {
            if d2[j] <= best.1 * best.1 {
                covered[j] = true;
            }
        }
        greedy.push(Ball::new(points[i].clone(), best.1));
    }
    let cost = |c: &[Ball]| c.iter().map(|b| b.radius.powf(s)).sum::<f64>();
    let cover = if cost(&greedy) <= single.radius.powf(s) { greedy } else { vec![single] };
    if !points.iter().all(|p| cover.iter().any(|b| b.contains(p))) {
        return Err(Error::Precondition("content cover misses a sample".into()));
    }
    let upper = cost(&cover);

    // Any cover may use radii in [r_min, D], D = diam: a larger ball can be
    // swapped for one of radius D centered at a sample.
    let big_d = diam.max(r_min);
    let box_count = box_count_bound(points, s, r_min, big_d);
    let mass = mass_bound(&dmat, s, r_min, big_d);
    Ok(ContentEstimate {
        s,
        upper,
        lower: box_count.max(mass),
        box_count,
        mass,
        cover,
        min_radius: r_min,
        points: m,
    })
}

// A ball of radius r meets at most (2r/l + 2)^n boxes of side l, so a cover
// costs at least N(l) min_r r^s / (2r/l + 2)^n. The quotient is unimodal in
// r, so the minimum sits at an end of [r_min, D].
fn box_count_bound(points: &[Vec<f64>], s: f64, r_min: f64, big_d: f64) -> f64 {
    let n = points[0].len() as i32;
    let mut best = 0.0f64;
    let mut side = 2f64.powf((2.0 * r_min).log2().floor());
    while side <= 2.0 * big_d {
        let mut boxes: Vec<Vec<i64>> =
            points.iter().map(|p| p.iter().map(|v| (v / side).floor() as i64).collect()).collect();
        boxes.sort();
        boxes.dedup();
        let phi = |r: f64| r.powf(s) / (2.0 * r / side + 2.0).powi(n);
        best = best.max(boxes.len() as f64 * phi(r_min).min(phi(big_d)));
        side *= 2.0;
    }
    best
}

// Mass distribution with μ uniform on the samples: a ball of radius r that
// meets E lies in B(x, 2r) for a sample x, so Σ r_k^s ≥ 1 / sup μ(B(x,2r))/r^s.
// For fixed x the quotient peaks where 2r first reaches a sample distance.
fn mass_bound(dmat: &[Vec<f64>], s: f64, r_min: f64, big_d: f64) -> f64 {
    let m = dmat.len() as f64;
    let worst = dmat
        .par_iter()
        .map(|row| {
            let mut d: Vec<f64> = row.clone();
            d.sort_by(f64::total_cmp);
            let mut c = 0.0f64;
            for (k, &dk) in d.iter().enumerate() {
                let r = (dk / 2.0).max(r_min);
                if r > big_d {
                    break;
                }
                // every sample within 2r, including ties beyond k
                let inside = d.partition_point(|v| *v <= 2.0 * r).max(k + 1);
                c = c.max(inside as f64 / m / r.powf(s));
            }
            c
        })
        .reduce(|| 0.0, f64::max);
    if worst > 0.0 { 1.0 / worst } else { 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|k| 2f64.powi(k)).collect()
    }

    #[test]
    fn empty_set() {
        let e = hausdorff_content(&[], 1.0, &[0.1]).unwrap();
        assert_eq!((e.upper, e.lower), (0.0, 0.0));
    }

    #[test]
    fn one_ball_single_cover() {
        let r = 0.3;
        let mut pts = Vec::new();
        for i in -20..=20 {
            for j in -20..=20 {
                let p = vec![0.5 + r * i as f64 / 20.0, 0.5 + r * j as f64 / 20.0];
                if dist(&p, &[0.5, 0.5]) <= r {
                    pts.push(p);
                }
            }
        }
        for s in [0.5, 1.0, 1.5, 2.0] {
            let e = hausdorff_content(&pts, s, &dyadic(-6, 0)).unwrap();
            assert!(e.upper <= r.powf(s) * (1.0 + 1e-12), "s={s}: {}", e.upper);
            assert!(e.lower <= e.upper);
        }
    }

    #[test]
    fn two_points_vanish_as_ladder_refines() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let mut prev = f64::INFINITY;
        for k in 2..10 {
            let e = hausdorff_content(&pts, 1.0, &dyadic(-k, 0)).unwrap();
            assert!((e.upper - 2.0 * 2f64.powi(-k)).abs() < 1e-15);
            assert!(e.upper < prev && e.lower <= e.upper);
            prev = e.upper;
        }
    }

    #[test]
    fn unit_segment_bounds_within_factor_eight() {
        let pts: Vec<Vec<f64>> = (0..=1024).map(|i| vec![i as f64 / 1024.0, 0.3]).collect();
        let e = hausdorff_content(&pts, 1.0, &dyadic(-10, 0)).unwrap();
        assert!(e.lower > 0.0 && e.upper / e.lower <= 8.0, "{} {}", e.lower, e.upper);
        assert!(e.upper <= 0.5 + 1e-12);
    }

    #[test]
    fn union_and_monotonicity() {
        let a: Vec<Vec<f64>> = (0..=64).map(|i| vec![i as f64 / 64.0, 0.0]).collect();
        let b: Vec<Vec<f64>> = (0..=64).map(|i| vec![0.0, 0.2 + i as f64 / 64.0]).collect();
        let lad = dyadic(-6, 0);
        let (ea, eb) = (hausdorff_content(&a, 1.0, &lad).unwrap(), hausdorff_content(&b, 1.0, &lad).unwrap());
        let both: Vec<Vec<f64>> = a.iter().chain(&b).cloned().collect();
        let eab = hausdorff_content(&both, 1.0, &lad).unwrap();
        let u = ea.union(&eb).unwrap();
        assert!(both.iter().all(|p| u.cover.iter().any(|c| c.contains(p))));
        assert!(u.upper <= ea.upper + eb.upper + 1e-12);
        assert!(ea.lower <= eab.upper && eb.lower <= eab.upper);
    }

    #[test]
    fn bad_parameters() {
        assert!(hausdorff_content(&[vec![0.0]], 0.0, &[1.0]).is_err());
        assert!(hausdorff_content(&[vec![0.0]], 1.0, &[]).is_err());
        assert!(hausdorff_content(&[vec![0.0]], 1.0, &[-1.0]).is_err());
    }
}
