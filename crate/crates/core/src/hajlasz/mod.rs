//! Pointwise (Hajlasz) gradients: `|f(x) − f(y)| ≤ |x − y| (g(x) + g(y))`.

mod decompose;
mod poincare;
mod telescoping;

pub use decompose::{divergence, mean_zero_decompose};
pub use poincare::{poincare_ratio, PoincareReport};
pub use telescoping::{telescoping_bound_check, TelescopingReport};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    finite_difference_gradient, hl_maximal_many, RadiusLadder, SampledField,
};
use crate::geometry::{dist, DomainShape};
use crate::lp::MinimalGradientLP;

/// Multiplier in `g = c · M(|Df|)`: twice [`CALIBRATED_RATIO`].
pub const CANONICAL_CONSTANT: f64 = 2.0 * CALIBRATED_RATIO;

/// Largest [`calibration_ratio`] over the reference corpus (1D grids with
/// 32/64/128 cells, 2D with 16/32), rounded up. Attained by the 2D bump.
pub const CALIBRATED_RATIO: f64 = 1.027_483_8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ConstraintMode {
    Global,
    /// Pairs at most `radius` apart.
    Scale { radius: f64 },
    /// Pairs with `|x − y| ≤ factor · min(d(x, ∂Ω), d(y, ∂Ω))`.
    Ball { domain: DomainShape, factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    pub d: f64,
    /// `|f_i − f_j| / d`.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub pairs: Vec<Pair>,
    pub mode: ConstraintMode,
    /// True when long-range pairs were sampled; LP optima are then lower
    /// bounds of the full problem.
    pub subsampled: bool,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_lp(&self, weights: &[f64]) -> Result<MinimalGradientLP> {
        MinimalGradientLP::new(weights.to_vec(), self.pairs.iter().map(|p| (p.i, p.j, p.c)).collect())
    }
}

fn boundary_distances(f: &SampledField, domain: &DomainShape) -> Result<Vec<f64>> {
    f.cloud()
        .points()
        .iter()
        .map(|x| if domain.contains(x) { domain.distance_to_boundary(x) } else { Ok(0.0) })
        .collect()
}

fn admits(mode: &ConstraintMode, bd: &[f64], i: usize, j: usize, d: f64) -> bool {
    match mode {
        ConstraintMode::Global => true,
        ConstraintMode::Scale { radius } => d <= *radius,
        ConstraintMode::Ball { factor, .. } => d <= factor * bd[i].min(bd[j]),
    }
}

/// Every pair of distinct points admitted by `mode`.
pub fn build_constraints(f: &SampledField, mode: &ConstraintMode) -> Result<ConstraintSet> {
    let cloud = f.cloud();
    let bd = match mode {
        ConstraintMode::Ball { domain, factor } => {
            if !(*factor > 0.0) {
                return Err(Error::Parameter("ball factor must be positive".into()));
            }
            boundary_distances(f, domain)?
        }
        ConstraintMode::Scale { radius } if !(*radius >= 0.0) => {
            return Err(Error::Parameter("scale radius must be nonnegative".into()));
        }
        _ => Vec::new(),
    };
    let v = f.values();
    let rows: Vec<Result<Vec<Pair>>> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in i + 1..cloud.len() {
                let d = dist(cloud.point(i), cloud.point(j));
                if d == 0.0 {
                    return Err(Error::DegeneratePair(i, j));
                }
                if admits(mode, &bd, i, j, d) {
                    out.push(Pair { i, j, d, c: (v[i] - v[j]).abs() / d });
                }
            }
            Ok(out)
        })
        .collect();
    let mut pairs = Vec::new();
    for r in rows {
        pairs.extend(r?);
    }
    Ok(ConstraintSet { pairs, mode: mode.clone(), subsampled: false })
}

/// Keeps all admitted pairs within `near`, plus `long_range` uniformly
/// sampled farther pairs (seeded).
pub fn build_constraints_sampled(
    f: &SampledField,
    mode: &ConstraintMode,
    near: f64,
    long_range: usize,
    seed: u64,
) -> Result<ConstraintSet> {
    let full = build_constraints(f, mode)?;
    let (close, far): (Vec<Pair>, Vec<Pair>) = full.pairs.into_iter().partition(|p| p.d <= near);
    if far.len() <= long_range {
        let mut pairs = close;
        pairs.extend(far);
        return Ok(ConstraintSet { pairs, mode: full.mode, subsampled: false });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = sample(&mut rng, far.len(), long_range).into_vec();
    pick.sort_unstable();
    let mut pairs = close;
    pairs.extend(pick.into_iter().map(|k| far[k]));
    Ok(ConstraintSet { pairs, mode: full.mode, subsampled: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Canonical,
    LpMinimal,
    VertexOracle,
    IrlsBound,
    User,
}

#[derive(Debug, Clone)]
pub struct GradientCandidate {
    pub g: SampledField,
    pub p: f64,
    pub provenance: Provenance,
    /// `min_pairs d(g_i + g_j) − |f_i − f_j|` against the constraints it was
    /// checked with (`+∞` for an empty set).
    pub slack: f64,
    pub feasible: bool,
}

impl GradientCandidate {
    pub fn new(f: &SampledField, g: SampledField, p: f64, provenance: Provenance, cs: &ConstraintSet) -> Result<Self> {
        if g.values().iter().any(|v| *v < 0.0) {
            return Err(Error::Parameter("gradient candidates are nonnegative".into()));
        }
        let r = verify_candidate(f, &g, cs, 0.0)?;
        Ok(GradientCandidate { g, p, provenance, slack: r.worst_slack, feasible: r.feasible })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub worst_pair: Option<(usize, usize)>,
    pub worst_slack: f64,
    pub violated_pairs: usize,
    pub feasible: bool,
    /// Points removed greedily (most violations first) until the rest is
    /// feasible.
    pub exceptional_points: Vec<usize>,
    pub exceptional_fraction: f64,
}

/// Checks `d_ij (g_i + g_j) ≥ |f_i − f_j| − tol` on every listed pair.
pub fn verify_candidate(
    f: &SampledField,
    g: &SampledField,
    cs: &ConstraintSet,
    tol: f64,
) -> Result<FeasibilityReport> {
    if f.len() != g.len() {
        return Err(Error::Parameter("field and candidate live on different clouds".into()));
    }
    let (gv, fv) = (g.values(), f.values());
    let slack: Vec<f64> =
        cs.pairs.par_iter().map(|p| p.d * (gv[p.i] + gv[p.j]) - (fv[p.i] - fv[p.j]).abs()).collect();
    let mut worst = (None, f64::INFINITY);
    for (p, s) in cs.pairs.iter().zip(&slack) {
        if *s < worst.1 {
            worst = (Some((p.i, p.j)), *s);
        }
    }
    let bad: Vec<usize> = (0..slack.len()).filter(|&k| slack[k] < -tol).collect();
    let mut removed = vec![false; f.len()];
    let mut exceptional = Vec::new();
    let mut live = bad.clone();
    while !live.is_empty() {
        let mut count = vec![0usize; f.len()];
        for &k in &live {
            count[cs.pairs[k].i] += 1;
            count[cs.pairs[k].j] += 1;
        }
        let worst_point = (0..f.len()).max_by_key(|&i| (count[i], std::cmp::Reverse(i))).unwrap();
        removed[worst_point] = true;
        exceptional.push(worst_point);
        live.retain(|&k| !removed[cs.pairs[k].i] && !removed[cs.pairs[k].j]);
    }
    Ok(FeasibilityReport {
        worst_pair: worst.0,
        worst_slack: worst.1,
        violated_pairs: bad.len(),
        feasible: bad.is_empty(),
        exceptional_fraction: exceptional.len() as f64 / f.len().max(1) as f64,
        exceptional_points: exceptional,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum CanonicalMode<'a> {
    /// Unrestricted maximal function, checked against all pairs.
    Global,
    /// Radius cap `d(x, ∂Ω)/2`, checked against ball-restricted pairs
    /// (factor ¼).
    Domain(&'a DomainShape),
}

/// `M(|D_j f|)` maximized over the axes, before the constant.
pub fn maximal_derivative(f: &SampledField, mode: CanonicalMode<'_>) -> Result<SampledField> {
    let parts = finite_difference_gradient(f)?;
    let abs: Vec<SampledField> = parts.iter().map(|p| p.map(f64::abs)).collect();
    let refs: Vec<&SampledField> = abs.iter().collect();
    let ladder = RadiusLadder::default_for(f.cloud());
    let (maxed, bd) = match mode {
        CanonicalMode::Global => (hl_maximal_many(&refs, |_| f64::INFINITY, ladder)?, None),
        CanonicalMode::Domain(dom) => {
            let bd = boundary_distances(f, dom)?;
            (hl_maximal_many(&refs, |i| bd[i] / 2.0, ladder)?, Some(bd))
        }
    };
    // continued as zero outside the domain
    let vals = (0..f.len())
        .map(|i| match &bd {
            Some(bd) if bd[i] == 0.0 => 0.0,
            _ => maxed.iter().map(|m| m.values()[i]).fold(0.0, f64::max),
        })
        .collect();
    f.with_values(vals)
}

/// `max_j M(|D_j f|)` with every ball radius capped at `cap`.
pub fn maximal_derivative_capped(f: &SampledField, cap: f64) -> Result<SampledField> {
    let parts = finite_difference_gradient(f)?;
    let abs: Vec<SampledField> = parts.iter().map(|p| p.map(f64::abs)).collect();
    let refs: Vec<&SampledField> = abs.iter().collect();
    let maxed = hl_maximal_many(&refs, |_| cap, RadiusLadder::default_for(f.cloud()))?;
    f.with_values((0..f.len()).map(|i| maxed.iter().map(|m| m.values()[i]).fold(0.0, f64::max)).collect())
}

/// `g = c · max_j M(|D_j f|)` with its slack.
pub fn canonical_gradient(f: &SampledField, mode: CanonicalMode<'_>) -> Result<GradientCandidate> {
    let g = maximal_derivative(f, mode)?.map(|v| CANONICAL_CONSTANT * v);
    let cs = match mode {
        CanonicalMode::Global => build_constraints(f, &ConstraintMode::Global)?,
        CanonicalMode::Domain(dom) => {
            build_constraints(f, &ConstraintMode::Ball { domain: dom.clone(), factor: 0.25 })?
        }
    };
    GradientCandidate::new(f, g, 1.0, Provenance::Canonical, &cs)
}

/// Largest `c_ij / (m_i + m_j)` over the pairs, with `m = max_j M(|D_j f|)`.
/// Pairs where both sides vanish are skipped (they carry `c_ij = 0` when the
/// field is locally constant).
pub fn calibration_ratio(f: &SampledField, cs: &ConstraintSet) -> Result<f64> {
    let m = maximal_derivative(f, CanonicalMode::Global)?;
    let mv = m.values();
    Ok(cs
        .pairs
        .par_iter()
        .filter(|p| p.c > 0.0)
        .map(|p| {
            let den = mv[p.i] + mv[p.j];
            if den > 0.0 {
                p.c / den
            } else {
                f64::INFINITY
            }
        })
        .reduce(|| 0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::MetricCloud;

    fn line(xs: &[f64]) -> Arc<MetricCloud> {
        Arc::new(MetricCloud::irregular(xs.iter().map(|x| vec![*x]).collect(), vec![1.0; xs.len()]).unwrap())
    }

    #[test]
    fn constraint_modes() {
        let f = SampledField::new(line(&[0.0, 1.0, 3.0]), vec![0.0, 1.0, 5.0]).unwrap();
        let g = build_constraints(&f, &ConstraintMode::Global).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.pairs[2], Pair { i: 1, j: 2, d: 2.0, c: 2.0 });
        assert!(build_constraints(&f, &ConstraintMode::Scale { radius: 0.0 }).unwrap().is_empty());
        assert_eq!(build_constraints(&f, &ConstraintMode::Scale { radius: 2.0 }).unwrap().len(), 2);
        let dup = SampledField::new(line(&[0.0, 1.0, 1.0]), vec![0.0; 3]).unwrap();
        assert!(matches!(build_constraints(&dup, &ConstraintMode::Global), Err(Error::DegeneratePair(1, 2))));
    }

    #[test]
    fn ball_mode_near_boundary() {
        let dom = DomainShape::unit_square(0.5);
        let c = Arc::new(MetricCloud::grid(vec![0.05, 0.05], 0.1, vec![10, 10]).unwrap());
        let f = SampledField::from_fn(c.clone(), |x| x[0]).unwrap();
        let mode = ConstraintMode::Ball { domain: dom.clone(), factor: 0.25 };
        let cs = build_constraints(&f, &mode).unwrap();
        for p in &cs.pairs {
            let bi = dom.distance_to_boundary(c.point(p.i)).unwrap();
            let bj = dom.distance_to_boundary(c.point(p.j)).unwrap();
            assert!(p.d <= 0.25 * bi.min(bj));
        }
        // points at distance 0.05 from the edge: admissible radius 0.0125 <
        // spacing, so no pairs at all
        let corner = c.nearest(&[0.05, 0.05]).unwrap();
        assert!(cs.pairs.iter().all(|p| p.i != corner && p.j != corner));
        // symmetric and monotone in the factor
        let smaller =
            build_constraints(&f, &ConstraintMode::Ball { domain: dom, factor: 0.2 }).unwrap();
        assert!(smaller.len() <= cs.len());
        for p in &smaller.pairs {
            assert!(cs.pairs.iter().any(|q| q.i == p.i && q.j == p.j));
        }
    }

    #[test]
    fn verify_examples() {
        let c = line(&[0.0, 1.0, 2.0, 3.0]);
        let zero = SampledField::constant(c.clone(), 0.0);
        let cs = build_constraints(&zero, &ConstraintMode::Global).unwrap();
        let r = verify_candidate(&zero, &zero, &cs, 0.0).unwrap();
        assert!(r.feasible && r.worst_slack == 0.0);

        let id = SampledField::from_fn(c.clone(), |x| x[0]).unwrap();
        let cs = build_constraints(&id, &ConstraintMode::Global).unwrap();
        let r = verify_candidate(&id, &zero, &cs, 0.0).unwrap();
        assert!(!r.feasible && r.worst_pair == Some((0, 3)) && r.worst_slack == -3.0);
        assert_eq!(r.exceptional_points.len(), 3);

        let half = SampledField::constant(c, 0.5);
        let r = verify_candidate(&id, &half, &cs, 0.0).unwrap();
        assert!(r.feasible && r.worst_slack == 0.0);
    }

    #[test]
    fn exceptional_point_found() {
        let c = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let f = SampledField::new(c.clone(), vec![0.0, 0.0, 10.0, 0.0, 0.0]).unwrap();
        let cs = build_constraints(&f, &ConstraintMode::Global).unwrap();
        let r = verify_candidate(&f, &SampledField::constant(c, 0.1), &cs, 0.0).unwrap();
        assert_eq!(r.exceptional_points, vec![2]);
        assert!((r.exceptional_fraction - 0.2).abs() < 1e-15);
    }

    #[test]
    fn slack_monotone_in_g() {
        let c = line(&[0.0, 0.3, 0.7, 1.0]);
        let f = SampledField::new(c.clone(), vec![1.0, -1.0, 0.5, 2.0]).unwrap();
        let cs = build_constraints(&f, &ConstraintMode::Global).unwrap();
        let g1 = SampledField::new(c.clone(), vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        let g2 = SampledField::new(c, vec![1.5, 2.0, 0.5, 1.0]).unwrap();
        let a = verify_candidate(&f, &g1, &cs, 0.0).unwrap().worst_slack;
        let b = verify_candidate(&f, &g2, &cs, 0.0).unwrap().worst_slack;
        assert!(b >= a);
    }

    #[test]
    fn canonical_constant_and_affine() {
        let c = Arc::new(MetricCloud::grid(vec![0.0], 1.0 / 32.0, vec![33]).unwrap());
        let k = canonical_gradient(&SampledField::constant(c.clone(), 4.0), CanonicalMode::Global).unwrap();
        assert!(k.g.values().iter().all(|v| *v == 0.0));
        assert!(k.feasible && k.slack == 0.0);
        let a = SampledField::from_fn(c, |x| -3.0 * x[0] + 1.0).unwrap();
        let k = canonical_gradient(&a, CanonicalMode::Global).unwrap();
        for v in k.g.values() {
            assert!((v - 3.0 * CANONICAL_CONSTANT).abs() < 1e-9);
        }
        assert!(k.feasible, "slack {}", k.slack);
    }

    #[test]
    fn corpus_ratio_below_calibration() {
        let c = crate::corpus::unit_grid(1, 32).unwrap();
        for f in crate::corpus::CORPUS {
            let s = f.sample(&c).unwrap();
            let cs = build_constraints(&s, &ConstraintMode::Global).unwrap();
            assert!(calibration_ratio(&s, &cs).unwrap() <= CALIBRATED_RATIO, "{}", f.name());
        }
    }

    #[test]
    fn sampled_constraints_are_subset() {
        let c = Arc::new(MetricCloud::grid(vec![0.0], 0.05, vec![21]).unwrap());
        let f = SampledField::from_fn(c, |x| x[0] * x[0]).unwrap();
        let full = build_constraints(&f, &ConstraintMode::Global).unwrap();
        let s = build_constraints_sampled(&f, &ConstraintMode::Global, 0.2, 30, 3).unwrap();
        assert!(s.subsampled && s.len() < full.len());
        for p in &s.pairs {
            assert!(full.pairs.contains(p));
        }
        let again = build_constraints_sampled(&f, &ConstraintMode::Global, 0.2, 30, 3).unwrap();
        assert_eq!(s, again);
    }
}
