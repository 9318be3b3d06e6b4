use serde::{Deserialize, Serialize};

use super::{bump, bump_grad_norm, dist, dist2, Ball, DomainShape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverRole {
    Whitney,
    Chain,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCover {
    pub balls: Vec<Ball>,
    pub role: CoverRole,
    /// Max over verification points of the number of inflated balls
    /// containing the point (inflation 2 for Whitney covers, 5 for greedy).
    pub overlap_bound: usize,
}

/// Vitali-type selection: scan by decreasing radius (ties by input order) and
/// keep a ball when it misses every ball kept so far.
///
/// Every input ball meets a kept ball of radius at least its own, hence lies
/// in that ball's 3x dilation; in particular the 5x dilations cover the union.
pub fn greedy_disjoint_subcover(balls: &[Ball]) -> Vec<Ball> {
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| balls[b].radius.total_cmp(&balls[a].radius).then(a.cmp(&b)));
    let mut kept: Vec<Ball> = Vec::new();
    for i in order {
        if kept.iter().all(|k| !k.intersects(&balls[i])) {
            kept.push(balls[i].clone());
        }
    }
    kept
}

/// Fraction of a ball's radius inside which the bump stays above
/// `(1 - BUMP_INNER_FRACTION^2)^2`; every covered point sits this deep in
/// some Whitney ball.
pub const BUMP_INNER_FRACTION: f64 = 0.8;

/// Whitney radius rule: `ρ = d(y, Ω)/3`, strictly inside `[d/4, d/2]`.
const RADIUS_OVER_DISTANCE: f64 = 1.0 / 3.0;

/// Collar cover `{B(y_i, ρ_i)}` outside a domain, with a partition of unity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitneyCover {
    pub cover: BallCover,
    /// `d(y_i, Ω)` for each ball.
    pub center_distances: Vec<f64>,
    pub eps0: f64,
    /// Points closer than this to the domain are not covered.
    pub floor: f64,
    /// Max of `ρ_i |∇h_i|` (upper estimate) over the verification points.
    pub gradient_constant: f64,
    #[serde(skip)]
    index: BallIndex,
}

#[derive(Debug, Clone, Default)]
struct BallIndex {
    origin: Vec<f64>,
    cell: f64,
    dims: Vec<usize>,
    buckets: Vec<Vec<usize>>,
}

impl BallIndex {
    /// Buckets each ball under every cell its `reach`-fold dilation touches.
    fn build(balls: &[Ball], reach: f64, lo: &[f64], hi: &[f64], cell: f64) -> Self {
        let n = lo.len();
        let dims: Vec<usize> =
            (0..n).map(|k| (((hi[k] - lo[k]) / cell).ceil() as usize).max(1)).collect();
        let total: usize = dims.iter().product();
        let mut buckets = vec![Vec::new(); total];
        for (i, b) in balls.iter().enumerate() {
            let r = b.radius * reach;
            let rng: Vec<(usize, usize)> = (0..n)
                .map(|k| {
                    let a = ((b.center[k] - r - lo[k]) / cell).floor().max(0.0) as usize;
                    let z = ((b.center[k] + r - lo[k]) / cell).floor().max(0.0) as usize;
                    (a.min(dims[k] - 1), z.min(dims[k] - 1))
                })
                .collect();
            let mut idx = rng.iter().map(|r| r.0).collect::<Vec<_>>();
            loop {
                let mut flat = 0;
                for k in (0..n).rev() {
                    flat = flat * dims[k] + idx[k];
                }
                buckets[flat].push(i);
                let mut k = 0;
                loop {
                    if k == n {
                        break;
                    }
                    if idx[k] < rng[k].1 {
                        idx[k] += 1;
                        break;
                    }
                    idx[k] = rng[k].0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
        BallIndex { origin: lo.to_vec(), cell, dims, buckets }
    }

    fn candidates(&self, x: &[f64]) -> &[usize] {
        let mut flat = 0;
        for k in (0..self.dims.len()).rev() {
            let c = ((x[k] - self.origin[k]) / self.cell).floor();
            if c < 0.0 || c as usize >= self.dims[k] {
                return &[];
            }
            flat = flat * self.dims[k] + c as usize;
        }
        &self.buckets[flat]
    }
}

/// Verification summary for a Whitney cover on a set of sample points.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WhitneyReport {
    pub balls: usize,
    /// Balls violating `d(y,Ω) ≤ 4ρ ≤ 2d(y,Ω)` (must be zero).
    pub sandwich_violations: usize,
    /// Sample points in the open collar `0 < d ≤ 10ε₀`, at or above the floor.
    pub checked_points: usize,
    /// Sample points skipped for being below the floor.
    pub below_floor: usize,
    /// Points breaking `χ_{A_{2ε₀}} ≤ Σh_i ≤ χ_{A_{10ε₀}}`.
    pub partition_violations: usize,
    /// Points of `A_{4ε₀}` (above the floor) not covered by any ball.
    pub uncovered: usize,
    pub max_partition_sum: f64,
    pub min_partition_sum_inner: f64,
    pub overlap_bound: usize,
    pub gradient_constant: f64,
    pub max_support_violation: f64,
}

impl WhitneyCover {
    pub fn balls(&self) -> &[Ball] {
        &self.cover.balls
    }

    /// Rebuilds the point-location index; needed after deserializing.
    pub fn reindex(&mut self, window: &super::BoundingBox) {
        let max_r = self.cover.balls.iter().map(|b| b.radius).fold(0.0, f64::max);
        let cell = (2.0 * max_r).max(self.eps0 / 4.0);
        self.index = BallIndex::build(&self.cover.balls, 2.0, &window.min, &window.max, cell);
    }

    /// Collar cutoff: 1 on `A_{2ε₀}`, linear down to 0 at `3ε₀`.
    fn taper(&self, d: f64) -> f64 {
        ((3.0 * self.eps0 - d) / self.eps0).clamp(0.0, 1.0)
    }

    /// Partition-of-unity weights `(i, h_i(x))` at a point with
    /// `d = d(x, Ω)`; empty inside the domain or away from the collar.
    pub fn weights_at(&self, x: &[f64], d: f64) -> Vec<(usize, f64)> {
        if d <= 0.0 {
            return Vec::new();
        }
        let eta = self.taper(d);
        if eta == 0.0 {
            return Vec::new();
        }
        let mut raw = Vec::new();
        let mut total = 0.0;
        for &i in self.index.candidates(x) {
            let b = &self.cover.balls[i];
            let w = bump(dist2(&b.center, x) / (b.radius * b.radius));
            if w > 0.0 {
                raw.push((i, w));
                total += w;
            }
        }
        if total == 0.0 {
            return Vec::new();
        }
        raw.into_iter().map(|(i, w)| (i, w * eta / total)).collect()
    }

    /// Number of balls whose `factor`-fold dilation contains `x`.
    pub fn multiplicity(&self, x: &[f64], factor: f64) -> usize {
        self.index
            .candidates(x)
            .iter()
            .filter(|&&i| self.cover.balls[i].dilate(factor).contains(x))
            .count()
    }

    /// Upper estimate of `max_i ρ_i |∇h_i(x)|` from the product/quotient rule.
    fn gradient_estimate(&self, x: &[f64], d: f64) -> f64 {
        let eta = self.taper(d);
        if eta == 0.0 {
            return 0.0;
        }
        let deta = if d > 2.0 * self.eps0 && d < 3.0 * self.eps0 { 1.0 / self.eps0 } else { 0.0 };
        let mut terms = Vec::new();
        let (mut s, mut ds) = (0.0, 0.0);
        for &i in self.index.candidates(x) {
            let b = &self.cover.balls[i];
            let z = dist(&b.center, x) / b.radius;
            let w = bump(z * z);
            if w > 0.0 {
                let g = bump_grad_norm(z) / b.radius;
                terms.push((b.radius, w, g));
                s += w;
                ds += g;
            }
        }
        if s == 0.0 {
            return 0.0;
        }
        terms
            .iter()
            .map(|&(r, w, g)| r * ((g * eta + w * deta) / s + w * eta * ds / (s * s)))
            .fold(0.0, f64::max)
    }

    /// Checks every structural invariant at the given points. Distances to the
    /// domain are recomputed through the domain's oracle.
    pub fn verify(&self, domain: &DomainShape, samples: &[Vec<f64>]) -> Result<WhitneyReport> {
        let mut rep = WhitneyReport {
            balls: self.cover.balls.len(),
            min_partition_sum_inner: f64::INFINITY,
            ..Default::default()
        };
        for (b, &d) in self.cover.balls.iter().zip(&self.center_distances) {
            let four_rho = 4.0 * b.radius;
            if !(d <= four_rho && four_rho <= 2.0 * d) || domain.contains(&b.center) {
                rep.sandwich_violations += 1;
            }
        }
        let e = self.eps0;
        for x in samples {
            let d = domain.distance_to_domain(x)?;
            if d <= 0.0 || d > 10.0 * e {
                continue;
            }
            if d < self.floor {
                rep.below_floor += 1;
                continue;
            }
            rep.checked_points += 1;
            let w = self.weights_at(x, d);
            let sum: f64 = w.iter().map(|p| p.1).sum();
            for &(i, hi) in &w {
                let b = &self.cover.balls[i];
                if hi < 0.0 || hi > 1.0 + 1e-12 {
                    rep.partition_violations += 1;
                }
                rep.max_support_violation =
                    rep.max_support_violation.max(dist(&b.center, x) - b.radius);
            }
            let lower = if d <= 2.0 * e { 1.0 } else { 0.0 };
            if sum < lower - 1e-12 || sum > 1.0 + 1e-12 {
                rep.partition_violations += 1;
            }
            if d <= 2.0 * e {
                rep.min_partition_sum_inner = rep.min_partition_sum_inner.min(sum);
            }
            rep.max_partition_sum = rep.max_partition_sum.max(sum);
            if d <= 4.0 * e && self.multiplicity(x, 1.0) == 0 {
                rep.uncovered += 1;
            }
            rep.overlap_bound = rep.overlap_bound.max(self.multiplicity(x, 2.0));
            rep.gradient_constant = rep.gradient_constant.max(self.gradient_estimate(x, d));
        }
        Ok(rep)
    }

    /// Regular verification grid over the collar region of the window.
    pub fn default_samples(&self, domain: &DomainShape, spacing: f64) -> Vec<Vec<f64>> {
        grid_points(&domain.bbox.min, &domain.bbox.max, spacing)
    }
}

pub(crate) fn grid_points(lo: &[f64], hi: &[f64], spacing: f64) -> Vec<Vec<f64>> {
    let n = lo.len();
    let counts: Vec<usize> =
        (0..n).map(|k| ((hi[k] - lo[k]) / spacing).floor() as usize + 1).collect();
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total);
    for mut flat in 0..total {
        let mut p = vec![0.0; n];
        for k in 0..n {
            p[k] = lo[k] + spacing * (flat % counts[k]) as f64;
            flat /= counts[k];
        }
        out.push(p);
    }
    out
}

/// Whitney-type cover of the collar `A_{4ε₀} \ A_floor` by balls
/// `B(y, d(y,Ω)/3)` centered at dyadic cube centers.
///
/// A dyadic cube is accepted once its half-diagonal is at most
/// `BUMP_INNER_FRACTION · ρ(y)`, so every point of an accepted cube lies in
/// the inner part of its ball. Cubes inside the domain, cubes beyond `4ε₀`
/// and cubes finer than the floor requires are pruned.
pub fn whitney_collar_cover(domain: &DomainShape, eps0: f64, floor: f64) -> Result<WhitneyCover> {
    if !(eps0 > 0.0) || !(floor > 0.0) || floor >= eps0 {
        return Err(Error::Parameter(format!("need 0 < floor < eps0, got {floor}, {eps0}")));
    }
    let n = domain.dim();
    let bbox = &domain.bbox;
    let reach = 10.0 * eps0;
    match domain.kind.boundary_extent() {
        Some(ext) => {
            for k in 0..n {
                if ext.min[k] - reach < bbox.min[k] || ext.max[k] + reach > bbox.max[k] {
                    return Err(Error::Cover(format!(
                        "collar A_(10 eps0) with eps0 = {eps0} leaves the bounding box along axis {k}"
                    )));
                }
            }
        }
        None => {
            // graph: the collar sits above the graph and must fit below the window top
            let DomainKind::LipschitzGraph { samples, y_min, y_max, .. } = &domain.kind else {
                unreachable!("only graphs have unbounded boundary")
            };
            let top = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let bottom = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            if top + reach > bbox.max[1] || bottom - reach < bbox.min[1] || y_max - y_min <= 0.0 {
                return Err(Error::Cover(format!(
                    "collar A_(10 eps0) with eps0 = {eps0} leaves the window"
                )));
            }
        }
    }
    let sqrt_n = (n as f64).sqrt();
    let theta = BUMP_INNER_FRACTION;
    // accepting needs hd <= theta * (floor - hd) * c; smallest cube that may be needed
    let hd_min = theta * RADIUS_OVER_DISTANCE * floor / (1.0 + theta * RADIUS_OVER_DISTANCE);

    let mut balls = Vec::new();
    let mut dists = Vec::new();
    let side0 = eps0;
    let counts: Vec<usize> =
        (0..n).map(|k| ((bbox.max[k] - bbox.min[k]) / side0).ceil() as usize).collect();
    let mut stack: Vec<(Vec<f64>, f64)> = Vec::new();
    let total: usize = counts.iter().product();
    for mut flat in 0..total {
        let mut corner = vec![0.0; n];
        for k in 0..n {
            corner[k] = bbox.min[k] + side0 * (flat % counts[k]) as f64;
            flat /= counts[k];
        }
        stack.push((corner, side0));
    }
    while let Some((corner, side)) = stack.pop() {
        let hd = side * sqrt_n / 2.0;
        let center: Vec<f64> = corner.iter().map(|c| c + side / 2.0).collect();
        if !bbox.contains(&center) {
            continue;
        }
        let d_b = domain.kind.nearest_boundary_point(&center).1;
        let inside = domain.contains(&center);
        if inside && d_b >= hd {
            continue;
        }
        if !inside && d_b - hd > 4.0 * eps0 {
            continue;
        }
        if !inside && d_b > 0.0 && hd <= theta * RADIUS_OVER_DISTANCE * d_b {
            balls.push(Ball::new(center, d_b * RADIUS_OVER_DISTANCE));
            dists.push(d_b);
            continue;
        }
        if hd < hd_min / 2.0 {
            continue;
        }
        let half = side / 2.0;
        for mask in 0..(1usize << n) {
            let c: Vec<f64> = (0..n)
                .map(|k| corner[k] + if mask >> k & 1 == 1 { half } else { 0.0 })
                .collect();
            stack.push((c, half));
        }
    }
    if balls.is_empty() {
        return Err(Error::Cover("no collar cubes accepted".into()));
    }
    // deterministic order: by radius descending, then coordinates
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| {
        balls[b].radius.total_cmp(&balls[a].radius).then_with(|| {
            balls[a]
                .center
                .iter()
                .zip(&balls[b].center)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let balls: Vec<Ball> = order.iter().map(|&i| balls[i].clone()).collect();
    let dists: Vec<f64> = order.iter().map(|&i| dists[i]).collect();
    let mut wc = WhitneyCover {
        cover: BallCover { balls, role: CoverRole::Whitney, overlap_bound: 0 },
        center_distances: dists,
        eps0,
        floor,
        gradient_constant: 0.0,
        index: BallIndex::default(),
    };
    wc.reindex(bbox);
    let samples = wc.default_samples(domain, eps0 / 8.0);
    let rep = wc.verify(domain, &samples)?;
    wc.cover.overlap_bound = rep.overlap_bound;
    wc.gradient_constant = rep.gradient_constant;
    Ok(wc)
}

use super::DomainKind;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundingBox;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn greedy_singleton_and_disjoint() {
        let b = Ball::new(vec![0.0, 0.0], 1.0);
        assert_eq!(greedy_disjoint_subcover(&[b.clone()]), vec![b.clone()]);
        let c = Ball::new(vec![5.0, 0.0], 0.5);
        let out = greedy_disjoint_subcover(&[c.clone(), b.clone()]);
        assert_eq!(out, vec![b, c]);
    }

    #[test]
    fn greedy_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let balls: Vec<Ball> = (0..10)
            .map(|_| Ball::new(vec![rng.gen(), rng.gen()], rng.gen_range(0.02..0.3)))
            .collect();
        let kept = greedy_disjoint_subcover(&balls);
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                assert!(!a.intersects(b));
            }
        }
        // brute-force sample points of the union
        for b in &balls {
            for k in 0..16 {
                let t = k as f64 * std::f64::consts::PI / 8.0;
                let p = [b.center[0] + b.radius * t.cos(), b.center[1] + b.radius * t.sin()];
                assert!(kept.iter().any(|s| s.dilate(5.0).contains(&p)));
            }
        }
    }

    #[test]
    fn square_cover_sandwich() {
        let sq = DomainShape::unit_square(1.0);
        let wc = whitney_collar_cover(&sq, 0.05, 0.005).unwrap();
        for (b, &d) in wc.balls().iter().zip(&wc.center_distances) {
            let exact = sq.distance_to_domain(&b.center).unwrap();
            assert_eq!(exact, d);
            assert!(d <= 4.0 * b.radius && 4.0 * b.radius <= 2.0 * d);
        }
        let rep = wc.verify(&sq, &wc.default_samples(&sq, 0.01)).unwrap();
        assert_eq!(rep.sandwich_violations, 0);
        assert_eq!(rep.partition_violations, 0, "{rep:?}");
        assert_eq!(rep.uncovered, 0);
    }

    #[test]
    fn flat_graph_layers_are_translates() {
        let g = DomainShape::lipschitz_graph(
            -1.0,
            1.0,
            vec![0.0; 5],
            0.0,
            BoundingBox::new(vec![-1.0, -1.5], vec![1.0, 1.5]),
        )
        .unwrap();
        let wc = whitney_collar_cover(&g, 0.1, 0.02).unwrap();
        // every ball at a given height has the same radius
        let mut by_height: std::collections::BTreeMap<i64, f64> = Default::default();
        for b in wc.balls() {
            let key = (b.center[1] * 1e9).round() as i64;
            let r = *by_height.entry(key).or_insert(b.radius);
            assert!((r - b.radius).abs() < 1e-12);
        }
    }

    #[test]
    fn oversized_collar_is_rejected() {
        let sq = DomainShape::unit_square(0.5);
        let diam = sq.bbox.diameter();
        assert!(matches!(whitney_collar_cover(&sq, diam, 0.01), Err(Error::Cover(_))));
    }
}
