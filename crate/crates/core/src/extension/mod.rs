//! Extension from uniform domains through a Whitney cover of the collar.
//!
//! Each collar ball `B_i = B(y_i, ρ_i)` is paired with a reflected ball
//! `B′_i ⊂ Ω` of comparable size and distance. The extension is
//! `F = Σ_i (⨍_{B′_i} f) h_i` outside `Ω`, damped by a Lipschitz cutoff, and
//! `F = f` on the closed domain.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{power_maximal_composite, MetricCloud, RadiusLadder, SampledField, Structure};
use crate::geometry::{dist, whitney_collar_cover, Ball, DomainShape, WhitneyCover};
use crate::hajlasz::{build_constraints, maximal_derivative, CanonicalMode, ConstraintMode, CANONICAL_CONSTANT};
use crate::lp::{min_gradient_quasinorm_p_lt_1, solve_min_gradient_p1, QuasinormMode};

/// Default comparability band for all recorded ratios.
pub const DEFAULT_BAND: [f64; 2] = [0.125, 8.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectedBall {
    pub ball: Ball,
    /// `diam(B_i) / diam(B′_i)`.
    pub diam_ratio: f64,
    /// `|y′_i − y_i| / diam(B_i)`.
    pub offset_ratio: f64,
    /// `d(B′_i, ∂Ω) / diam(B′_i)`.
    pub depth_ratio: f64,
    /// Step `k` of the accepted center `z + 2^(k/4) d(y_i, Ω) u`; steps are
    /// tried in the order `0, −1, 1, −2, …`.
    pub step: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub eps0: f64,
    pub floor: f64,
    /// Preferred reflected radius `radius_factor · ρ_i`; halved when no
    /// admissible center exists.
    pub radius_factor: f64,
    pub band: [f64; 2],
    pub max_steps: u32,
}

impl PlanOptions {
    pub fn new(eps0: f64) -> Self {
        PlanOptions { eps0, floor: eps0 / 32.0, radius_factor: 1.0, band: DEFAULT_BAND, max_steps: 40 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionPlan {
    pub domain: DomainShape,
    pub options: PlanOptions,
    pub cover: WhitneyCover,
    /// Indexed like the Whitney balls.
    pub reflected: Vec<ReflectedBall>,
}

pub fn build_extension_plan(domain: &DomainShape, eps0: f64, c: f64) -> Result<ExtensionPlan> {
    build_extension_plan_with(domain, &PlanOptions { radius_factor: c, ..PlanOptions::new(eps0) })
}

pub fn build_extension_plan_with(domain: &DomainShape, opts: &PlanOptions) -> Result<ExtensionPlan> {
    if !(opts.radius_factor > 0.0) {
        return Err(Error::Parameter(format!("radius factor must be positive, got {}", opts.radius_factor)));
    }
    if !(opts.band[0] > 0.0 && opts.band[0] < opts.band[1]) {
        return Err(Error::Parameter(format!("bad comparability band {:?}", opts.band)));
    }
    let cover = whitney_collar_cover(domain, opts.eps0, opts.floor)?;
    let reflected = cover
        .balls()
        .par_iter()
        .zip(&cover.center_distances)
        .enumerate()
        .map(|(i, (b, &d))| {
            reflect(domain, b, d, opts).map_err(|reason| Error::Reflection { index: i, reason })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtensionPlan { domain: domain.clone(), options: *opts, cover, reflected })
}

const STEPS_PER_OCTAVE: f64 = 4.0;
const PUSHES: usize = 3;

// March from the nearest boundary point z into the domain along (z − y)/|z − y|,
// around the mirror point.
fn reflect(
    domain: &DomainShape,
    b: &Ball,
    d: f64,
    opts: &PlanOptions,
) -> std::result::Result<ReflectedBall, String> {
    let z = domain.nearest_boundary_point(&b.center).map_err(|e| e.to_string())?;
    let u: Vec<f64> = z.iter().zip(&b.center).map(|(a, c)| (a - c) / d).collect();
    // preferred radius first, halved while the diameter ratio stays in band
    let mut r = opts.radius_factor * b.radius;
    while b.radius / r <= opts.band[1] {
        if let Some(rb) = march(domain, b, d, &z, &u, r, opts)? {
            return Ok(rb);
        }
        r /= 2.0;
    }
    Err(format!("march exhausted after {} steps from radius {}", opts.max_steps, b.radius))
}

fn march(
    domain: &DomainShape,
    b: &Ball,
    d: f64,
    z: &[f64],
    u: &[f64],
    r: f64,
    opts: &PlanOptions,
) -> std::result::Result<Option<ReflectedBall>, String> {
    let within = |v: f64| v >= opts.band[0] && v <= opts.band[1];
    let want = 1.5 * r * (1.0 + 2.0 * opts.band[0]);
    for m in 0..opts.max_steps as i32 {
        let k = if m % 2 == 0 { m / 2 } else { -(m + 1) / 2 };
        let t = d * 2f64.powf(k as f64 / STEPS_PER_OCTAVE);
        let mut c: Vec<f64> = z.iter().zip(u).map(|(a, v)| a + t * v).collect();
        if !domain.contains(&c) {
            continue;
        }
        // too shallow: push along the inward normal at the candidate's own
        // nearest boundary point (a corner or a side running alongside)
        for _ in 0..PUSHES {
            let dc = domain.distance_to_boundary(&c).map_err(|e| e.to_string())?;
            if dc >= want || dc == 0.0 {
                break;
            }
            let zc = domain.nearest_boundary_point(&c).map_err(|e| e.to_string())?;
            let next: Vec<f64> = c.iter().zip(&zc).map(|(a, b)| a + (want - dc) * (a - b) / dc).collect();
            if !domain.contains(&next) {
                break;
            }
            c = next;
        }
        let gap = domain.distance_to_boundary(&c).map_err(|e| e.to_string())? - r;
        if gap < 0.0 {
            continue;
        }
        let rb = ReflectedBall {
            diam_ratio: b.radius / r,
            offset_ratio: dist(&c, &b.center) / (2.0 * b.radius),
            depth_ratio: gap / (2.0 * r),
            ball: Ball::new(c, r),
            step: k,
        };
        if within(rb.diam_ratio) && within(rb.offset_ratio) && within(rb.depth_ratio) {
            return Ok(Some(rb));
        }
    }
    Ok(None)
}

impl ExtensionPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut plan: ExtensionPlan = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        if plan.reflected.len() != plan.cover.balls().len() {
            return Err(Error::Format("reflected ball count does not match the cover".into()));
        }
        plan.cover.reindex(&plan.domain.bbox);
        Ok(plan)
    }

    /// Final cutoff: 1 on `A_{ε₀/2}`, linear down to 0 at `ε₀`.
    pub fn cutoff(&self, d: f64) -> f64 {
        let e = self.options.eps0;
        ((e - d) / (0.5 * e)).clamp(0.0, 1.0)
    }

    /// Where `Σh_i = 1` and the cutoff is 1, with `d = d(x, Ω)`.
    pub fn full_region(&self, d: f64) -> bool {
        d <= 0.5 * self.options.eps0
    }

    /// False for points strictly between the domain and the cover floor,
    /// where `extend` has no Whitney ball to use.
    pub fn resolves(&self, x: &[f64]) -> Result<bool> {
        let d = self.domain.distance_to_domain(x)?;
        Ok(d <= self.closure_tol() || d >= self.cover.floor)
    }

    fn closure_tol(&self) -> f64 {
        1e-9 * self.domain.bbox.diameter()
    }

    /// Measure-weighted averages of `f` over each `B′_i`; `None` when the
    /// ball holds no sample.
    pub fn averages(&self, f: &SampledField) -> Vec<Option<f64>> {
        averages_of(f, &self.reflected)
    }
}

fn averages_of(f: &SampledField, balls: &[ReflectedBall]) -> Vec<Option<f64>> {
    let c = f.cloud();
    balls
        .par_iter()
        .map(|rb| {
            let (mut s, mut w) = (0.0, 0.0);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (i, x) in c.points().iter().enumerate() {
                if rb.ball.contains(x) {
                    let v = f.values()[i];
                    s += c.measures()[i] * v;
                    w += c.measures()[i];
                    (lo, hi) = (lo.min(v), hi.max(v));
                }
            }
            // constant data averages to itself, not to a rounded quotient
            (w > 0.0).then(|| if lo == hi { lo } else { s / w })
        })
        .collect()
}

// Index of the sample of `f` at `x`, if any.
fn locate(cloud: &MetricCloud, x: &[f64], tol: f64) -> Option<usize> {
    let hit = match cloud.structure() {
        Structure::Grid { origin, spacing, counts } => {
            let mut flat = 0;
            let mut stride = 1;
            for k in 0..counts.len() {
                let t = ((x[k] - origin[k]) / spacing).round();
                if t < 0.0 || t as usize >= counts[k] {
                    return None;
                }
                flat += stride * t as usize;
                stride *= counts[k];
            }
            flat
        }
        Structure::Irregular => cloud.nearest(x)?,
    };
    (dist(cloud.point(hit), x) <= tol).then_some(hit)
}

/// `F` on the points of `target`. Points of the closed domain must be
/// samples of `f`.
pub fn extend(f: &SampledField, plan: &ExtensionPlan, target: &Arc<MetricCloud>) -> Result<SampledField> {
    if target.dim() != plan.domain.dim() || f.cloud().dim() != plan.domain.dim() {
        return Err(Error::Parameter("dimension mismatch between field, plan and target".into()));
    }
    let avg = plan.averages(f);
    let tol = plan.closure_tol();
    let values = target
        .points()
        .par_iter()
        .map(|x| {
            let d = plan.domain.distance_to_domain(x)?;
            if d <= tol {
                let i = locate(f.cloud(), x, tol).ok_or_else(|| {
                    Error::Resolution(format!("domain point {x:?} is not a sample of f"))
                })?;
                return Ok(f.values()[i]);
            }
            let eta = plan.cutoff(d);
            if eta == 0.0 {
                return Ok(0.0);
            }
            let w = plan.cover.weights_at(x, d);
            if w.is_empty() {
                return Err(Error::Resolution(format!("collar point {x:?} at distance {d} is not covered")));
            }
            let mut terms = Vec::with_capacity(w.len());
            for (i, h) in w {
                let a = avg[i].ok_or_else(|| {
                    Error::Resolution(format!("reflected ball {i} contains no sample; refine the grid"))
                })?;
                terms.push((h, a));
            }
            if plan.full_region(d) {
                // Σh_i = 1 here: centring on one average makes constants exact
                let a0 = terms[0].1;
                return Ok(a0 + terms.iter().map(|(h, a)| h * (a - a0)).sum::<f64>());
            }
            Ok(eta * terms.iter().map(|(h, a)| h * a).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    SampledField::new(target.clone(), values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueReport {
    /// Max of `|f_B − f_B′| / ((|x − x′| + r + r′)(inf_B g₁ + inf_B′ g₁))`.
    pub c_hat: Option<f64>,
    pub q_tilde: f64,
    pub pairs: usize,
    pub zero_denominator: usize,
    /// Pairs skipped because a reflected ball holds no sample.
    pub empty_balls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionQuality {
    pub p: f64,
    pub radius: f64,
    /// Minimal-gradient quasinorm of `F` where the cutoff is 1.
    pub extended_norm: f64,
    pub domain_norm: f64,
    /// `extended_norm / domain_norm`; `None` when the latter vanishes.
    pub ratio: Option<f64>,
    pub degenerate: bool,
    pub extended_points: usize,
    /// True for `p < 1`, where only IRLS upper bounds are available.
    pub upper_bound_only: bool,
    pub certified: bool,
    pub mean_value: Option<MeanValueReport>,
}

struct Norm {
    value: f64,
    certified: bool,
}

fn min_gradient_norm(f: &SampledField, radius: f64, p: f64) -> Result<Norm> {
    let cs = build_constraints(f, &ConstraintMode::Scale { radius })?;
    if cs.pairs.iter().all(|q| q.c == 0.0) {
        return Ok(Norm { value: 0.0, certified: true });
    }
    let lp = cs.to_lp(f.cloud().measures())?;
    if p == 1.0 {
        let s = solve_min_gradient_p1(&lp, 1e-9)?;
        Ok(Norm { value: s.value(), certified: s.optimal })
    } else {
        let r = min_gradient_quasinorm_p_lt_1(&lp, p, QuasinormMode::Irls)?;
        Ok(Norm { value: r.objective.powf(1.0 / p), certified: false })
    }
}

/// Extension-norm ratio with pairs at most `radius` apart, and the
/// mean-value constant over pairs of reflected balls whose doubled Whitney
/// balls meet.
pub fn extension_quality(
    f: &SampledField,
    big_f: &SampledField,
    plan: &ExtensionPlan,
    p: f64,
    radius: f64,
) -> Result<ExtensionQuality> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter(format!("p must lie in (0, 1], got {p}")));
    }
    if !(radius > 0.0) {
        return Err(Error::Parameter("constraint radius must be positive".into()));
    }
    let cloud = big_f.cloud();
    let keep = cloud
        .points()
        .iter()
        .map(|x| plan.domain.distance_to_domain(x).map(|d| plan.full_region(d)))
        .collect::<Result<Vec<bool>>>()?;
    let idx: Vec<usize> = (0..cloud.len()).filter(|&i| keep[i]).collect();
    let sub = Arc::new(cloud.restrict(&idx));
    let big_sub = SampledField::new(sub, idx.iter().map(|&i| big_f.values()[i]).collect())?;
    let num = min_gradient_norm(&big_sub, radius, p)?;
    let den = min_gradient_norm(f, radius, p)?;
    let degenerate = den.value == 0.0;
    let n = f.cloud().dim() as f64;
    let lower = n / (n + 1.0);
    let mean_value = if p > lower && matches!(f.cloud().structure(), Structure::Grid { .. }) {
        Some(mean_value_constant(f, plan, 0.5 * (lower + p))?)
    } else {
        None
    };
    Ok(ExtensionQuality {
        p,
        radius,
        extended_norm: num.value,
        domain_norm: den.value,
        ratio: (!degenerate).then(|| num.value / den.value),
        degenerate,
        extended_points: idx.len(),
        upper_bound_only: p < 1.0,
        certified: num.certified && den.certified,
        mean_value,
    })
}

fn mean_value_constant(f: &SampledField, plan: &ExtensionPlan, q: f64) -> Result<MeanValueReport> {
    let g = maximal_derivative(f, CanonicalMode::Global)?.map(|v| CANONICAL_CONSTANT * v);
    let g1 = power_maximal_composite(&g, q, RadiusLadder::default_for(f.cloud()))?;
    let avg = plan.averages(f);
    let inf: Vec<Option<f64>> = plan
        .reflected
        .par_iter()
        .map(|rb| {
            f.cloud()
                .points()
                .iter()
                .zip(g1.values())
                .filter(|(x, _)| rb.ball.contains(x))
                .map(|(_, v)| *v)
                .reduce(f64::min)
        })
        .collect();
    let balls = plan.cover.balls();
    let near = touching_pairs(balls, 2.0);
    let rows: Vec<(Option<f64>, usize, usize, usize)> = near
        .par_iter()
        .enumerate()
        .map(|(i, js)| {
            let (mut best, mut pairs, mut zero, mut empty) = (None::<f64>, 0, 0, 0);
            for &j in js {
                let (Some(ai), Some(aj), Some(gi), Some(gj)) = (avg[i], avg[j], inf[i], inf[j]) else {
                    empty += 1;
                    continue;
                };
                let (bi, bj) = (&plan.reflected[i].ball, &plan.reflected[j].ball);
                let den = (dist(&bi.center, &bj.center) + bi.radius + bj.radius) * (gi + gj);
                if den == 0.0 {
                    zero += 1;
                    continue;
                }
                pairs += 1;
                let r = (ai - aj).abs() / den;
                best = Some(best.map_or(r, |b| b.max(r)));
            }
            (best, pairs, zero, empty)
        })
        .collect();
    let mut rep = MeanValueReport { c_hat: None, q_tilde: q, pairs: 0, zero_denominator: 0, empty_balls: 0 };
    for (b, p, z, e) in rows {
        if let Some(b) = b {
            rep.c_hat = Some(rep.c_hat.map_or(b, |c: f64| c.max(b)));
        }
        rep.pairs += p;
        rep.zero_denominator += z;
        rep.empty_balls += e;
    }
    Ok(rep)
}

/// For each ball, the later-indexed balls whose `factor`-fold dilations
/// meet it. Balls are bucketed by dyadic radius level so that each level can
/// be searched with a grid matched to its largest radius.
fn touching_pairs(balls: &[Ball], factor: f64) -> Vec<Vec<usize>> {
    use std::collections::HashMap;
    let Some(n) = balls.first().map(|b| b.dim()) else {
        return Vec::new();
    };
    let mut levels: HashMap<i32, Vec<usize>> = HashMap::new();
    for (i, b) in balls.iter().enumerate() {
        levels.entry(b.radius.log2().floor() as i32).or_default().push(i);
    }
    let grids: Vec<(f64, HashMap<Vec<i64>, Vec<usize>>)> = levels
        .values()
        .map(|ids| {
            let rmax = ids.iter().map(|&i| balls[i].radius).fold(0.0, f64::max);
            let cell = 2.0 * factor * rmax;
            let mut g: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
            for &i in ids {
                g.entry(balls[i].center.iter().map(|v| (v / cell).floor() as i64).collect()).or_default().push(i);
            }
            (rmax, g)
        })
        .collect();
    balls
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let mut out = Vec::new();
            for (rmax, g) in &grids {
                let cell = 2.0 * factor * rmax;
                let reach = factor * (b.radius + rmax);
                let lo: Vec<i64> = b.center.iter().map(|v| ((v - reach) / cell).floor() as i64).collect();
                let hi: Vec<i64> = b.center.iter().map(|v| ((v + reach) / cell).floor() as i64).collect();
                let mut key = lo.clone();
                loop {
                    for &j in g.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                        if j > i && dist(&b.center, &balls[j].center) <= factor * (b.radius + balls[j].radius) {
                            out.push(j);
                        }
                    }
                    let mut k = 0;
                    while k < n {
                        if key[k] < hi[k] {
                            key[k] += 1;
                            break;
                        }
                        key[k] = lo[k];
                        k += 1;
                    }
                    if k == n {
                        break;
                    }
                }
            }
            out.sort_unstable();
            out
        })
        .collect()
}
