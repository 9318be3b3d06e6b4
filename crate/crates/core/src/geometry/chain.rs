use serde::{Deserialize, Serialize};

use super::{dist, Ball, DomainKind, DomainShape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Chain stops once radii drop below `floor_fraction * |x - y|`.
    pub floor_fraction: f64,
    /// Maximum number of balls before giving up.
    pub max_balls: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { floor_fraction: (2f64).powi(-20), max_balls: 20_000 }
    }
}

/// Balls `B(z_k, r_k)` joining `x` to `y`, ordered from `x`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainOfBalls {
    pub balls: Vec<Ball>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// Length of the path the balls were placed on.
    pub path_length: f64,
    /// `Σ r_k / |x - y|`.
    pub sum_constant: f64,
    /// Radius below which the chain was truncated at either end.
    pub truncation_radius: f64,
}

impl ChainOfBalls {
    /// Checks `6B_k ⊂ Ω`, consecutive intersection and radius ratios; returns
    /// the index of the first offending ball.
    pub fn check(&self, domain: &DomainShape) -> std::result::Result<(), usize> {
        for (k, b) in self.balls.iter().enumerate() {
            let d = domain.kind.nearest_boundary_point(&b.center).1;
            if !domain.contains(&b.center) || 6.0 * b.radius > d {
                return Err(k);
            }
            if let Some(next) = self.balls.get(k + 1) {
                if !b.intersects(next) || next.radius > 2.0 * b.radius || 2.0 * next.radius < b.radius
                {
                    return Err(k);
                }
            }
        }
        Ok(())
    }
}

struct Polyline {
    pts: Vec<Vec<f64>>,
    cum: Vec<f64>,
}

impl Polyline {
    fn new(pts: Vec<Vec<f64>>) -> Self {
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            cum.push(cum.last().unwrap() + dist(&w[0], &w[1]));
        }
        Polyline { pts, cum }
    }

    fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn at(&self, t: f64) -> Vec<f64> {
        let k = match self.cum.iter().position(|&c| c >= t) {
            Some(0) => return self.pts[0].clone(),
            Some(k) => k,
            None => return self.pts.last().unwrap().clone(),
        };
        let (a, b) = (&self.pts[k - 1], &self.pts[k]);
        let seg = self.cum[k] - self.cum[k - 1];
        let w = if seg > 0.0 { (t - self.cum[k - 1]) / seg } else { 0.0 };
        a.iter().zip(b).map(|(u, v)| u + w * (v - u)).collect()
    }
}

fn segments_cross(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let orient = |u: [f64; 2], v: [f64; 2], w: [f64; 2]| {
        (v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0])
    };
    let (d1, d2) = (orient(a, b, p), orient(a, b, q));
    let (d3, d4) = (orient(p, q, a), orient(p, q, b));
    // touching counts as crossing: paths must stay strictly inside
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

fn visible(domain: &DomainShape, p: &[f64], q: &[f64]) -> bool {
    match &domain.kind {
        DomainKind::Polygon { vertices } => {
            let (p2, q2) = ([p[0], p[1]], [q[0], q[1]]);
            let n = vertices.len();
            (0..n).all(|i| !segments_cross(p2, q2, vertices[i], vertices[(i + 1) % n]))
                && domain.contains(&[(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0])
        }
        _ => {
            let steps = 256;
            (0..=steps).all(|k| {
                let w = k as f64 / steps as f64;
                let z: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + w * (b - a)).collect();
                domain.contains(&z)
            })
        }
    }
}

/// Interior path from `x` to `y`: the segment when visible, otherwise the
/// shortest path through reflex polygon vertices pushed into the domain.
fn interior_path(domain: &DomainShape, x: &[f64], y: &[f64]) -> Result<Polyline> {
    if domain.is_convex() || visible(domain, x, y) {
        return Ok(Polyline::new(vec![x.to_vec(), y.to_vec()]));
    }
    let DomainKind::Polygon { vertices } = &domain.kind else {
        return Err(Error::Chain { balls: 0, reason: "segment leaves a non-polygonal domain".into() });
    };
    let n = vertices.len();
    let area2: f64 = (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    let orientation = area2.signum();
    let span = dist(x, y);
    let mut nodes: Vec<Vec<f64>> = vec![x.to_vec(), y.to_vec()];
    for i in 0..n {
        let (a, v, b) = (vertices[(i + n - 1) % n], vertices[i], vertices[(i + 1) % n]);
        let cr = (v[0] - a[0]) * (b[1] - v[1]) - (v[1] - a[1]) * (b[0] - v[0]);
        if cr * orientation >= 0.0 {
            continue;
        }
        // reflex vertex: push along the bisector into the domain
        let u1 = {
            let l = dist(&a, &v);
            [(a[0] - v[0]) / l, (a[1] - v[1]) / l]
        };
        let u2 = {
            let l = dist(&b, &v);
            [(b[0] - v[0]) / l, (b[1] - v[1]) / l]
        };
        let mut bis = [-(u1[0] + u2[0]), -(u1[1] + u2[1])];
        let bl = (bis[0] * bis[0] + bis[1] * bis[1]).sqrt();
        if bl == 0.0 {
            continue;
        }
        bis = [bis[0] / bl, bis[1] / bl];
        let mut off = 0.25 * span;
        for _ in 0..40 {
            let cand = vec![v[0] + off * bis[0], v[1] + off * bis[1]];
            if domain.contains(&cand) && domain.kind.nearest_boundary_point(&cand).1 >= 0.5 * off {
                nodes.push(cand);
                break;
            }
            off /= 2.0;
        }
    }
    // Dijkstra over the visibility graph
    let m = nodes.len();
    let mut best = vec![f64::INFINITY; m];
    let mut prev = vec![usize::MAX; m];
    let mut done = vec![false; m];
    best[0] = 0.0;
    for _ in 0..m {
        let Some(u) = (0..m).filter(|&i| !done[i]).min_by(|&a, &b| best[a].total_cmp(&best[b]))
        else {
            break;
        };
        if !best[u].is_finite() {
            break;
        }
        done[u] = true;
        for v in 0..m {
            if !done[v] && visible(domain, &nodes[u], &nodes[v]) {
                let c = best[u] + dist(&nodes[u], &nodes[v]);
                if c < best[v] {
                    best[v] = c;
                    prev[v] = u;
                }
            }
        }
    }
    if !best[1].is_finite() {
        return Err(Error::Chain { balls: 0, reason: "no interior path between endpoints".into() });
    }
    let mut path = vec![1usize];
    while *path.last().unwrap() != 0 {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    Ok(Polyline::new(path.into_iter().map(|i| nodes[i].clone()).collect()))
}

/// Cigar chain between two interior points of a (caller-asserted) uniform
/// domain with constant `c`.
///
/// Centers sit on the interior path at arclength points refined dyadically
/// from the midpoint toward both ends; radii are
/// `min(min(t, T - t)/c, d(γ(t), ∂Ω)/6)`. Consecutive balls that fail to
/// intersect or whose radii differ by more than a factor two get midpoints
/// inserted until the chain is admissible or the ball budget runs out.
pub fn uniform_chain(
    domain: &DomainShape,
    x: &[f64],
    y: &[f64],
    c: f64,
    cfg: ChainConfig,
) -> Result<ChainOfBalls> {
    if !(c >= 1.0) {
        return Err(Error::Parameter(format!("uniformity constant must be >= 1, got {c}")));
    }
    for p in [x, y] {
        domain.distance_to_boundary(p)?;
        if !domain.contains(p) {
            return Err(Error::Domain(format!("chain endpoint {p:?} is not interior")));
        }
    }
    let span = dist(x, y);
    let empty = |len| ChainOfBalls {
        balls: Vec::new(),
        start: x.to_vec(),
        end: y.to_vec(),
        path_length: len,
        sum_constant: 0.0,
        truncation_radius: 0.0,
    };
    if span == 0.0 {
        return Ok(empty(0.0));
    }
    let path = interior_path(domain, x, y)?;
    let total = path.length();
    let floor = cfg.floor_fraction * span;
    let radius = |t: f64| -> f64 {
        let z = path.at(t);
        let d = domain.kind.nearest_boundary_point(&z).1;
        (t.min(total - t) / c).min(d / 6.0)
    };
    // r_k + r_{k+1} >= t_{k+1} - t_k needs a step ratio q <= (c+1)/(c-1)
    let qmax = if c > 1.0 { ((c + 1.0) / (c - 1.0)).min(2.0) } else { 2.0 };
    let per_octave = (std::f64::consts::LN_2 / qmax.ln()).ceil().max(1.0);
    let q = 2f64.powf(1.0 / per_octave);
    let mut ts = vec![total / 2.0];
    let mut t = total / 2.0;
    loop {
        t /= q;
        if t / c < floor || ts.len() > cfg.max_balls {
            break;
        }
        ts.push(t);
        ts.push(total - t);
    }
    ts.sort_by(f64::total_cmp);
    let mut radii: Vec<f64> = ts.iter().map(|&t| radius(t)).collect();
    let mut centers: Vec<Vec<f64>> = ts.iter().map(|&t| path.at(t)).collect();
    let mut k = 0;
    while k + 1 < ts.len() {
        let ok = dist(&centers[k], &centers[k + 1]) <= radii[k] + radii[k + 1]
            && radii[k + 1] <= 2.0 * radii[k]
            && radii[k] <= 2.0 * radii[k + 1];
        if ok {
            k += 1;
            continue;
        }
        if ts.len() >= cfg.max_balls {
            let balls = centers.into_iter().zip(radii).map(|(z, r)| Ball::new(z, r)).collect::<Vec<_>>();
            return Err(Error::Chain {
                balls: balls.len(),
                reason: format!("budget exhausted near arclength {}", ts[k]),
            });
        }
        let mid = 0.5 * (ts[k] + ts[k + 1]);
        if mid - ts[k] < 1e-14 * total {
            return Err(Error::Chain { balls: ts.len(), reason: "step refinement stalled".into() });
        }
        ts.insert(k + 1, mid);
        radii.insert(k + 1, radius(mid));
        centers.insert(k + 1, path.at(mid));
    }
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Chain { balls: radii.len(), reason: "path touches the boundary".into() });
    }
    let truncation_radius = radii.first().copied().unwrap_or(0.0).max(radii.last().copied().unwrap_or(0.0));
    let balls: Vec<Ball> = centers.into_iter().zip(radii).map(|(z, r)| Ball::new(z, r)).collect();
    let sum: f64 = balls.iter().map(|b| b.radius).sum();
    let chain = ChainOfBalls {
        balls,
        start: x.to_vec(),
        end: y.to_vec(),
        path_length: total,
        sum_constant: sum / span,
        truncation_radius,
    };
    if let Err(k) = chain.check(domain) {
        return Err(Error::Chain { balls: chain.balls.len(), reason: format!("ball {k} inadmissible") });
    }
    Ok(chain)
}
