//! Condenser capacity `cap(E; U)` on a cloud: an explicit Lipschitz witness
//! for every `p`, the joint LP for `p = 1`, and a fatness probe built on both.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::content::hausdorff_content;
use crate::error::{Error, Result};
use crate::field::MetricCloud;
use crate::geometry::{dist, DomainShape};
use crate::lp::{
    min_gradient_quasinorm_p_lt_1, solve_capacity_lp, solve_min_gradient_p1, CapacityProblem, MinimalGradientLP,
    QuasinormMode,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub e: Vec<usize>,
    pub u: Vec<usize>,
    pub p: f64,
    pub max_distance: f64,
    /// Discrete `d(E, U^c)`; infinite when `U` is the whole cloud.
    pub separation: f64,
    /// `max(0, 1 − d(x, E)/separation)`: 1 on `E`, 0 off `U`.
    pub witness: Vec<f64>,
    pub witness_gradient: Vec<f64>,
    /// `Σ m_i g_i^p` for the witness gradient.
    pub upper: f64,
    /// The witness gradient itself comes from IRLS (`p < 1`) or from the
    /// `p = 1` optimum (`p > 1`), so `upper` is not the witness minimum.
    pub upper_bound_only: bool,
    /// Joint capacity LP (`p = 1` only).
    pub lp_value: Option<f64>,
    pub lp_certified: Option<bool>,
}

// Constrained pairs: both points within max_distance and one of them in U.
fn witness_pairs(cloud: &MetricCloud, in_u: &[bool], phi: &[f64], max_distance: f64) -> Result<Vec<(usize, usize, f64)>> {
    let n = cloud.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !(in_u[i] || in_u[j]) {
                continue;
            }
            let d = dist(cloud.point(i), cloud.point(j));
            if d > max_distance {
                continue;
            }
            if d == 0.0 {
                return Err(Error::DegeneratePair(i, j));
            }
            let c = (phi[i] - phi[j]).abs() / d;
            if c > 0.0 {
                pairs.push((i, j, c));
            }
        }
    }
    Ok(pairs)
}

pub fn hardy_capacity(e: &[usize], u: &[usize], cloud: &MetricCloud, p: f64, max_distance: f64) -> Result<CapacityEstimate> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("exponent must be positive, got {p}")));
    }
    if !(max_distance > 0.0) {
        return Err(Error::Parameter("max_distance must be positive".into()));
    }
    let n = cloud.len();
    let mut in_u = vec![false; n];
    for &i in u {
        if i >= n || in_u[i] {
            return Err(Error::Precondition("U must list distinct cloud points".into()));
        }
        in_u[i] = true;
    }
    if e.iter().any(|&i| i >= n || !in_u[i]) {
        return Err(Error::Precondition("E is not contained in U".into()));
    }
    let zero = |separation| CapacityEstimate {
        e: e.to_vec(),
        u: u.to_vec(),
        p,
        max_distance,
        separation,
        witness: vec![0.0; n],
        witness_gradient: vec![0.0; n],
        upper: 0.0,
        upper_bound_only: false,
        lp_value: (p == 1.0).then_some(0.0),
        lp_certified: (p == 1.0).then_some(true),
    };
    if e.is_empty() {
        return Ok(zero(f64::INFINITY));
    }

    let d_e: Vec<f64> = cloud
        .points()
        .par_iter()
        .map(|x| e.iter().map(|&k| dist(x, cloud.point(k))).fold(f64::INFINITY, f64::min))
        .collect();
    let separation = (0..n).filter(|&i| !in_u[i]).map(|i| d_e[i]).fold(f64::INFINITY, f64::min);
    if separation == 0.0 {
        return Err(Error::Precondition("degenerate separation: d(E, U^c) = 0".into()));
    }
    let witness: Vec<f64> = d_e
        .iter()
        .map(|d| if separation.is_finite() { (1.0 - d / separation).max(0.0) } else { 1.0 })
        .collect();

    let pairs = witness_pairs(cloud, &in_u, &witness, max_distance)?;
    let (witness_gradient, upper, upper_bound_only) = if pairs.is_empty() {
        (vec![0.0; n], 0.0, false)
    } else {
        let lp = MinimalGradientLP::new(cloud.measures().to_vec(), pairs)?;
        if p < 1.0 {
            let mode = if n <= 6 { QuasinormMode::VertexOracle } else { QuasinormMode::Irls };
            let r = min_gradient_quasinorm_p_lt_1(&lp, p, mode)?;
            (r.candidate, r.objective, r.upper_bound_only)
        } else {
            let g = solve_min_gradient_p1(&lp, 1e-10)?.primal;
            let value = g.iter().zip(cloud.measures()).map(|(v, m)| m * v.max(0.0).powf(p)).sum();
            (g, value, p > 1.0)
        }
    };

    let (lp_value, lp_certified) = if p == 1.0 {
        let s = solve_capacity_lp(&CapacityProblem { cloud, e, u, max_distance }, 1e-10)?;
        (Some(s.value), Some(s.solution.optimal))
    } else {
        (None, None)
    };
    Ok(CapacityEstimate { lp_value, lp_certified, witness, witness_gradient, upper, upper_bound_only, ..zero(separation) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatnessOptions {
    /// Local grid nodes per ladder radius.
    pub points_per_radius: usize,
    /// Pair range in grid steps.
    pub reach: f64,
    /// Content exponent is `n − q`.
    pub q: f64,
}

impl FatnessOptions {
    pub fn new(q: f64) -> Self {
        FatnessOptions { points_per_radius: 4, reach: 1.5, q }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatnessSample {
    pub x: Vec<f64>,
    pub r: f64,
    pub e_points: usize,
    pub u_points: usize,
    /// LP value for `p = 1`, witness bound otherwise.
    pub capacity: f64,
    pub capacity_ratio: f64,
    pub content_lower_ratio: f64,
    pub content_upper_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatnessReport {
    pub p: f64,
    pub q: f64,
    pub samples: Vec<FatnessSample>,
    /// Infima over samples and radii.
    pub capacity_ratio: f64,
    pub content_lower_ratio: f64,
    pub content_upper_ratio: f64,
    /// False when the `p ≠ 1` capacities are witness upper bounds.
    pub capacity_exact: bool,
}

fn probe_one(domain: &DomainShape, p: f64, x: &[f64], r: f64, opts: &FatnessOptions) -> Result<FatnessSample> {
    let n = x.len();
    let h = r / opts.points_per_radius as f64;
    let max_distance = opts.reach * h;
    let outer = 2.0 * r + max_distance;
    let m = (outer / h).ceil() as usize;
    let origin: Vec<f64> = x.iter().map(|v| v - m as f64 * h).collect();
    let grid = MetricCloud::grid(origin, h, vec![2 * m + 1; n])?;
    let keep: Vec<usize> = (0..grid.len()).filter(|&i| dist(grid.point(i), x) <= outer).collect();
    let cloud = grid.restrict(&keep);

    let on_boundary = |y: &[f64]| domain.distance_to_boundary(y).map_or(false, |d| d <= 1e-9 * h);
    let mut e = Vec::new();
    let mut u = Vec::new();
    let mut target = Vec::new();
    for (i, y) in cloud.points().iter().enumerate() {
        let d = dist(y, x);
        if d < 2.0 * r {
            u.push(i);
            if d <= r && (!domain.contains(y) || on_boundary(y)) {
                e.push(i);
                target.push(y.clone());
            }
        }
    }
    let est = hardy_capacity(&e, &u, &cloud, p, max_distance)?;
    let capacity = est.lp_value.unwrap_or(est.upper);

    let s = n as f64 - opts.q;
    let mut ladder = Vec::new();
    let mut rho = h;
    while rho <= 2.0 * r * (1.0 + 1e-12) {
        ladder.push(rho);
        rho *= 2.0;
    }
    let content = hausdorff_content(&target, s, &ladder)?;
    Ok(FatnessSample {
        x: x.to_vec(),
        r,
        e_points: e.len(),
        u_points: u.len(),
        capacity,
        capacity_ratio: capacity / r.powf(n as f64 - p),
        content_lower_ratio: content.lower / r.powf(s),
        content_upper_ratio: content.upper / r.powf(s),
    })
}

/// Capacity and content of `Ω^c ∩ B(x, r)` relative to `B(x, 2r)` on a
/// local grid of spacing `r / points_per_radius`, for every sample and radius.
pub fn fatness_probe(
    domain: &DomainShape,
    p: f64,
    samples: &[Vec<f64>],
    ladder: &[f64],
    opts: &FatnessOptions,
) -> Result<FatnessReport> {
    if samples.is_empty() || ladder.is_empty() {
        return Err(Error::Precondition("fatness probe needs samples and radii".into()));
    }
    if opts.points_per_radius == 0 || !(opts.reach >= 1.0) {
        return Err(Error::Parameter("need points_per_radius ≥ 1 and reach ≥ 1".into()));
    }
    let n = domain.dim() as f64;
    if !(opts.q > 0.0 && opts.q < n) {
        return Err(Error::Parameter(format!("content exponent n − q must lie in (0, n), got q = {}", opts.q)));
    }
    if ladder.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Parameter("ladder radii must be positive".into()));
    }
    for x in samples {
        if domain.contains(x) && domain.distance_to_boundary(x)? > 0.0 {
            return Err(Error::Precondition(format!("sample {x:?} lies inside the domain")));
        }
    }
    let jobs: Vec<(&Vec<f64>, f64)> = samples.iter().flat_map(|x| ladder.iter().map(move |&r| (x, r))).collect();
    let out: Vec<FatnessSample> = jobs.par_iter().map(|(x, r)| probe_one(domain, p, x, *r, opts)).collect::<Result<_>>()?;
    let inf = |f: fn(&FatnessSample) -> f64| out.iter().map(f).fold(f64::INFINITY, f64::min);
    Ok(FatnessReport {
        p,
        q: opts.q,
        capacity_ratio: inf(|s| s.capacity_ratio),
        content_lower_ratio: inf(|s| s.content_lower_ratio),
        content_upper_ratio: inf(|s| s.content_upper_ratio),
        capacity_exact: p == 1.0,
        samples: out,
    })
}
