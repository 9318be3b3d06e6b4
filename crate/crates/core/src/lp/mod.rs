//! Certified linear programs: minimal pointwise gradients (p = 1), the
//! condenser capacity LP, exact vertex oracles and an IRLS bound for p < 1.

pub mod simplex;
pub mod vertex;

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use simplex::{LinearProgram, Row, SimplexOptions, Status};

use crate::error::{Error, Result};
use crate::field::MetricCloud;
use crate::geometry::dist;

/// `min Σ w_i g_i` subject to `g_i + g_j ≥ c_ij`, `g ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalGradientLP {
    weights: Vec<f64>,
    pairs: Vec<(usize, usize, f64)>,
}

impl MinimalGradientLP {
    pub fn new(weights: Vec<f64>, pairs: Vec<(usize, usize, f64)>) -> Result<Self> {
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Parameter("weights must be positive".into()));
        }
        for &(i, j, c) in &pairs {
            if i >= weights.len() || j >= weights.len() || i == j {
                return Err(Error::Parameter(format!("bad pair ({i}, {j})")));
            }
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::Parameter(format!("pair ({i}, {j}) has demand {c}")));
            }
        }
        Ok(MinimalGradientLP { weights, pairs })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, self.pairs.clone())
    }

    pub fn linear_program(&self) -> LinearProgram {
        LinearProgram {
            costs: self.weights.clone(),
            rows: self
                .pairs
                .iter()
                .map(|&(i, j, c)| Row { coeffs: vec![(i, 1.0), (j, 1.0)], rhs: c })
                .collect(),
        }
    }

    fn scale(&self) -> f64 {
        self.pairs.iter().fold(0.0, |a, p| a.max(p.2))
    }

    /// Sparse triple text format:
    ///
    /// ```text
    /// # hajlasz-lp v1
    /// n 3
    /// w 0 1
    /// c 0 1 0.5
    /// ```
    pub fn to_triples(&self) -> String {
        let mut s = String::from("# hajlasz-lp v1\n");
        let _ = writeln!(s, "n {}", self.weights.len());
        for (i, w) in self.weights.iter().enumerate() {
            let _ = writeln!(s, "w {i} {w:e}");
        }
        for (i, j, c) in &self.pairs {
            let _ = writeln!(s, "c {i} {j} {c:e}");
        }
        s
    }

    pub fn from_triples(text: &str) -> Result<Self> {
        let mut n = None;
        let mut weights = Vec::new();
        let mut pairs = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Format(format!("line {}: {line:?}", ln + 1));
            let tok: Vec<&str> = line.split_whitespace().collect();
            let idx = |s: &str| s.parse::<usize>().map_err(|_| bad());
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            match tok.as_slice() {
                ["n", k] => {
                    let k = idx(k)?;
                    n = Some(k);
                    weights = vec![f64::NAN; k];
                }
                ["w", i, w] => {
                    let i = idx(i)?;
                    *weights.get_mut(i).ok_or_else(bad)? = num(w)?;
                }
                ["c", i, j, c] => pairs.push((idx(i)?, idx(j)?, num(c)?)),
                _ => return Err(bad()),
            }
        }
        if n.is_none() {
            return Err(Error::Format("missing variable count".into()));
        }
        if weights.iter().any(|w| w.is_nan()) {
            return Err(Error::Format("missing weight".into()));
        }
        Self::new(weights, pairs)
    }
}

/// Primal/dual pair with its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LPSolution {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub relative_gap: f64,
    /// Largest constraint violation of `primal` (≤ 0 when feasible).
    pub max_violation: f64,
    /// Largest `(Aᵀy − c)_k` left after rescaling, at round-off level.
    pub dual_violation: f64,
    pub optimal: bool,
    pub pivots: usize,
    /// Optimum as an exact fraction when the rational path ran.
    pub exact_objective: Option<String>,
}

impl LPSolution {
    pub fn value(&self) -> f64 {
        self.primal_objective
    }
}

// Clip and rescale so that the certificate is valid as stated.
fn certify(lp: &LinearProgram, x: &[f64], y: &[f64], optimal: bool, pivots: usize) -> LPSolution {
    let x: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let mut y: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
    let mut load = vec![0.0; lp.costs.len()];
    for (r, yj) in lp.rows.iter().zip(&y) {
        for (k, a) in &r.coeffs {
            load[*k] += a * yj;
        }
    }
    // Round-off overshoot on a column (zero-cost columns especially) is
    // kept and reported; anything larger is removed by scaling y down.
    let mut mass = vec![0.0; lp.costs.len()];
    for (r, yj) in lp.rows.iter().zip(&y) {
        for (k, a) in &r.coeffs {
            mass[*k] += (a * yj).abs();
        }
    }
    let top = mass.iter().cloned().fold(0.0, f64::max);
    let slack = |k: usize| 1e-12 * (mass[k] + top);
    let mut shrink = 1.0f64;
    for (k, (l, c)) in load.iter().zip(&lp.costs).enumerate() {
        if *l > *c + slack(k) {
            shrink = shrink.min(if *l > 0.0 { c / l } else { 1.0 });
        }
    }
    if shrink < 1.0 {
        for v in y.iter_mut() {
            *v *= shrink;
        }
    }
    let dual_violation =
        load.iter().zip(&lp.costs).map(|(l, c)| (l * shrink - c).max(0.0)).fold(0.0, f64::max);
    let primal_objective = lp.objective(&x);
    let dual_objective: f64 = lp.rows.iter().zip(&y).map(|(r, v)| r.rhs * v).sum();
    let gap = primal_objective - dual_objective;
    let denom = primal_objective.abs().max(dual_objective.abs());
    LPSolution {
        dual_violation,
        max_violation: if lp.rows.is_empty() { 0.0 } else { lp.max_violation(&x) },
        primal: x,
        dual: y,
        primal_objective,
        dual_objective,
        gap,
        relative_gap: if denom > 0.0 { gap / denom } else { 0.0 },
        optimal,
        pivots,
        exact_objective: None,
    }
}

fn solve_exact(lp: &LinearProgram) -> Result<LPSolution> {
    let s = simplex::solve::<BigRational>(lp, SimplexOptions::default())?;
    let x: Vec<f64> = s.x.iter().map(|v| simplex::Scalar::to_f64(v)).collect();
    let y: Vec<f64> = s.y.iter().map(|v| simplex::Scalar::to_f64(v)).collect();
    let mut sol = certify(lp, &x, &y, s.status == Status::Optimal, s.pivots);
    sol.exact_objective = Some(s.objective.to_string());
    Ok(sol)
}

/// Solves a general LP in floating point, re-solving exactly when the
/// certificate is weaker than `tol` (relative gap, or violation relative to
/// `scale`).
pub fn solve_certified(lp: &LinearProgram, tol: f64, scale: f64) -> Result<LPSolution> {
    let s = simplex::solve::<f64>(lp, SimplexOptions::default())?;
    let sol = certify(lp, &s.x, &s.y, s.status == Status::Optimal, s.pivots);
    let weak = sol.relative_gap > tol
        || sol.max_violation > tol * scale.max(1e-300)
        || sol.dual_violation > tol * lp.costs.iter().fold(1e-300f64, |a, c| a.max(c.abs()));
    if weak && lp.costs.len() <= 400 {
        return solve_exact(lp);
    }
    Ok(sol)
}

/// Minimal `Σ w_i g_i` over pointwise gradients, with dual certificate.
pub fn solve_min_gradient_p1(lp: &MinimalGradientLP, tol: f64) -> Result<LPSolution> {
    solve_certified(&lp.linear_program(), tol, lp.scale())
}

/// Same, forced through exact rational arithmetic.
pub fn solve_min_gradient_exact(lp: &MinimalGradientLP) -> Result<LPSolution> {
    solve_exact(&lp.linear_program())
}

/// Exact optimum by enumerating every vertex (at most 8 variables).
pub fn exact_oracle_min_gradient(lp: &MinimalGradientLP) -> Result<BigRational> {
    if lp.len() > 8 {
        return Err(Error::Size { vars: lp.len(), limit: 8 });
    }
    Ok(vertex::exact_minimum(&lp.linear_program())?.unwrap_or_else(BigRational::zero))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasinormMode {
    VertexOracle,
    Irls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasinormResult {
    /// `Σ w_i g_i^p` at the candidate.
    pub objective: f64,
    pub candidate: Vec<f64>,
    pub mode: QuasinormMode,
    /// IRLS only bounds the minimum from above.
    pub upper_bound_only: bool,
}

pub const IRLS_ITERATIONS: usize = 20;

/// Minimum of the concave objective `Σ w_i g_i^p`, `0 < p < 1`, over the
/// same feasible set.
pub fn min_gradient_quasinorm_p_lt_1(lp: &MinimalGradientLP, p: f64, mode: QuasinormMode) -> Result<QuasinormResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parameter(format!("exponent must lie in (0, 1), got {p}")));
    }
    let obj = |g: &[f64]| -> f64 { lp.weights.iter().zip(g).map(|(w, v)| w * v.max(0.0).powf(p)).sum() };
    match mode {
        QuasinormMode::VertexOracle => {
            if lp.len() > 6 {
                return Err(Error::Size { vars: lp.len(), limit: 6 });
            }
            // vertices come sorted, so the first strict minimum is the
            // lexicographically smallest optimal vertex
            let mut best: Option<(f64, Vec<f64>)> = None;
            for v in vertex::enumerate_vertices(&lp.linear_program())? {
                let g: Vec<f64> = v.iter().map(simplex::Scalar::to_f64).collect();
                let val = obj(&g);
                if best.as_ref().map_or(true, |(b, _)| val < *b) {
                    best = Some((val, g));
                }
            }
            let (objective, candidate) = best.unwrap_or((0.0, vec![0.0; lp.len()]));
            Ok(QuasinormResult { objective, candidate, mode, upper_bound_only: false })
        }
        QuasinormMode::Irls => {
            let eps = 1e-6 * lp.scale().max(f64::MIN_POSITIVE);
            let mut g = solve_min_gradient_p1(lp, 1e-10)?.primal;
            let mut best = (obj(&g), g.clone());
            for _ in 0..IRLS_ITERATIONS {
                let w: Vec<f64> =
                    lp.weights.iter().zip(&g).map(|(w, v)| w * p * v.max(eps).powf(p - 1.0)).collect();
                g = solve_min_gradient_p1(&lp.with_weights(w)?, 1e-10)?.primal;
                let val = obj(&g);
                if val < best.0 {
                    best = (val, g.clone());
                }
            }
            Ok(QuasinormResult { objective: best.0, candidate: best.1, mode, upper_bound_only: true })
        }
    }
}

/// Discrete condenser capacity of `E` relative to `U` with pointwise
/// gradients: minimize `Σ m_i g_i` over potentials `φ ≥ 1` on `E`, `φ = 0`
/// off `U`, subject to `|φ_i − φ_j| ≤ d_ij (g_i + g_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitySolution {
    pub value: f64,
    pub potential: Vec<f64>,
    pub gradient: Vec<f64>,
    pub pairs: usize,
    pub solution: LPSolution,
}

pub struct CapacityProblem<'a> {
    pub cloud: &'a MetricCloud,
    pub e: &'a [usize],
    pub u: &'a [usize],
    /// Only pairs at most this far apart are constrained.
    pub max_distance: f64,
}

impl CapacityProblem<'_> {
    // Variables: g_0..g_{N-1}, then φ for each U point in order.
    pub fn linear_program(&self) -> Result<(LinearProgram, usize)> {
        let n = self.cloud.len();
        if self.e.is_empty() {
            return Err(Error::Precondition("capacity of an empty set".into()));
        }
        let mut slot = vec![usize::MAX; n];
        for (k, &i) in self.u.iter().enumerate() {
            if i >= n || slot[i] != usize::MAX {
                return Err(Error::Precondition("U must list distinct cloud points".into()));
            }
            slot[i] = n + k;
        }
        if self.e.iter().any(|&i| i >= n || slot[i] == usize::MAX) {
            return Err(Error::Precondition("E is not contained in U".into()));
        }
        let mut costs = self.cloud.measures().to_vec();
        costs.extend(std::iter::repeat(0.0).take(self.u.len()));
        let mut rows = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if slot[i] == usize::MAX && slot[j] == usize::MAX {
                    continue;
                }
                let d = dist(self.cloud.point(i), self.cloud.point(j));
                if d > self.max_distance {
                    continue;
                }
                if d == 0.0 {
                    return Err(Error::DegeneratePair(i, j));
                }
                for (a, b) in [(i, j), (j, i)] {
                    // d g_a + d g_b − φ_a + φ_b ≥ 0
                    let mut c = vec![(a, d), (b, d)];
                    if slot[a] != usize::MAX {
                        c.push((slot[a], -1.0));
                    }
                    if slot[b] != usize::MAX {
                        c.push((slot[b], 1.0));
                    }
                    rows.push(Row { coeffs: c, rhs: 0.0 });
                }
            }
        }
        let pairs = rows.len() / 2;
        for &i in self.e {
            rows.push(Row { coeffs: vec![(slot[i], 1.0)], rhs: 1.0 });
        }
        Ok((LinearProgram { costs, rows }, pairs))
    }
}

pub fn solve_capacity_lp(problem: &CapacityProblem<'_>, tol: f64) -> Result<CapacitySolution> {
    let (lp, pairs) = problem.linear_program()?;
    let sol = solve_certified(&lp, tol, 1.0).map_err(|e| match e {
        Error::Solver(m) => Error::Solver(format!("capacity LP: {m}")),
        other => other,
    })?;
    let n = problem.cloud.len();
    let mut potential = vec![0.0; n];
    for (k, &i) in problem.u.iter().enumerate() {
        potential[i] = sol.primal[n + k].min(1.0);
    }
    Ok(CapacitySolution {
        value: sol.primal_objective,
        gradient: sol.primal[..n].to_vec(),
        potential,
        pairs,
        solution: sol,
    })
}

/// Exact capacity by vertex enumeration (tiny instances only).
pub fn exact_capacity_oracle(problem: &CapacityProblem<'_>) -> Result<BigRational> {
    let (lp, _) = problem.linear_program()?;
    if lp.costs.len() > 8 {
        return Err(Error::Size { vars: lp.costs.len(), limit: 8 });
    }
    vertex::exact_minimum(&lp)?.ok_or_else(|| Error::Solver("capacity LP infeasible".into()))
}

#[cfg(test)]
mod tests {
    use std::str::FromStr;
    use std::sync::Arc;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn q(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    fn triangle() -> MinimalGradientLP {
        MinimalGradientLP::new(vec![1.0; 3], vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn random_lp(rng: &mut ChaCha8Rng, n: usize) -> MinimalGradientLP {
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j, (f[i] - f[j]).abs() / (xs[i] - xs[j]).abs()));
            }
        }
        MinimalGradientLP::new(w, pairs).unwrap()
    }

    #[test]
    fn hand_instances() {
        let s = solve_min_gradient_p1(&triangle(), 1e-12).unwrap();
        assert!((s.value() - 1.5).abs() < 1e-12);
        assert!(s.primal.iter().all(|g| (g - 0.5).abs() < 1e-12));
        assert_eq!(exact_oracle_min_gradient(&triangle()).unwrap(), q("3/2"));
        assert_eq!(solve_min_gradient_exact(&triangle()).unwrap().exact_objective.as_deref(), Some("3/2"));

        let two = MinimalGradientLP::new(vec![1.0, 1.0], vec![(0, 1, 1.0)]).unwrap();
        let s = solve_min_gradient_p1(&two, 1e-12).unwrap();
        assert!((s.value() - 1.0).abs() < 1e-12 && s.gap.abs() < 1e-12);
        assert_eq!(exact_oracle_min_gradient(&two).unwrap(), q("1"));

        let flat = MinimalGradientLP::new(vec![1.0; 4], vec![(0, 1, 0.0), (2, 3, 0.0)]).unwrap();
        assert_eq!(solve_min_gradient_p1(&flat, 1e-12).unwrap().value(), 0.0);
        assert!(exact_oracle_min_gradient(&flat).unwrap().is_zero());
    }

    #[test]
    fn identity_on_four_point_line() {
        // f = identity at 0,1,2,3: every c_ij = 1
        let mut pairs = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                pairs.push((i, j, 1.0));
            }
        }
        let lp = MinimalGradientLP::new(vec![1.0; 4], pairs).unwrap();
        let exact = simplex::Scalar::to_f64(&exact_oracle_min_gradient(&lp).unwrap());
        let s = solve_min_gradient_p1(&lp, 1e-12).unwrap();
        assert!((s.value() - exact).abs() < 1e-9);
        assert!((exact - 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_instances_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(2..=7);
            let lp = random_lp(&mut rng, n);
            let s = solve_min_gradient_p1(&lp, 1e-10).unwrap();
            let o = simplex::Scalar::to_f64(&exact_oracle_min_gradient(&lp).unwrap());
            assert!((s.value() - o).abs() <= 1e-9 * o.max(1.0), "{} vs {}", s.value(), o);
            assert!(s.relative_gap <= 1e-8);
            assert!(s.dual_objective <= s.primal_objective + 1e-12);
        }
    }

    #[test]
    fn oracle_size_limit() {
        let lp = MinimalGradientLP::new(vec![1.0; 9], vec![]).unwrap();
        assert!(matches!(exact_oracle_min_gradient(&lp), Err(Error::Size { .. })));
    }

    #[test]
    fn triples_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lp = random_lp(&mut rng, 5);
        assert_eq!(MinimalGradientLP::from_triples(&lp.to_triples()).unwrap(), lp);
        assert!(MinimalGradientLP::from_triples("n 2\nw 0 1\n").is_err());
        assert!(MinimalGradientLP::from_triples("n 1\nw 0 1\nbogus\n").is_err());
    }

    #[test]
    fn p_below_one() {
        let two = MinimalGradientLP::new(vec![1.0, 0.5], vec![(0, 1, 1.0)]).unwrap();
        let v = min_gradient_quasinorm_p_lt_1(&two, 0.8, QuasinormMode::VertexOracle).unwrap();
        assert!((v.objective - 0.5).abs() < 1e-15);
        assert_eq!(v.candidate, vec![0.0, 1.0]);
        let zero = MinimalGradientLP::new(vec![1.0, 1.0], vec![(0, 1, 0.0)]).unwrap();
        for mode in [QuasinormMode::VertexOracle, QuasinormMode::Irls] {
            assert_eq!(min_gradient_quasinorm_p_lt_1(&zero, 0.7, mode).unwrap().objective, 0.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..15 {
            let n = rng.gen_range(2..=6);
            let lp = random_lp(&mut rng, n);
            let a = min_gradient_quasinorm_p_lt_1(&lp, 0.75, QuasinormMode::VertexOracle).unwrap();
            let b = min_gradient_quasinorm_p_lt_1(&lp, 0.75, QuasinormMode::Irls).unwrap();
            assert!(b.upper_bound_only && !a.upper_bound_only);
            assert!(b.objective >= a.objective * (1.0 - 1e-9));
        }
        assert!(min_gradient_quasinorm_p_lt_1(&two, 1.0, QuasinormMode::Irls).is_err());
    }

    fn line_cloud(xs: &[f64], m: f64) -> MetricCloud {
        MetricCloud::irregular(xs.iter().map(|x| vec![*x]).collect(), vec![m; xs.len()]).unwrap()
    }

    #[test]
    fn capacity_single_interior_point() {
        let d = 0.25;
        let cloud = line_cloud(&[0.0, d, 2.0 * d], d);
        let p = CapacityProblem { cloud: &cloud, e: &[1], u: &[1], max_distance: f64::INFINITY };
        let s = solve_capacity_lp(&p, 1e-12).unwrap();
        // φ climbs 0 → 1 over distance d on both sides; g = 1/d at the
        // centre carries both constraints: m · (1/d) = 1
        assert!((s.value - 1.0).abs() < 1e-12);
        assert_eq!(exact_capacity_oracle(&p).unwrap(), q("1"));
        assert!(matches!(
            solve_capacity_lp(&CapacityProblem { e: &[], ..p }, 1e-9),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            solve_capacity_lp(&CapacityProblem { e: &[0], ..p }, 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn capacity_e_equals_u_matches_oracle() {
        let cloud = line_cloud(&[0.0, 0.5, 1.0, 1.5], 0.5);
        let p = CapacityProblem { cloud: &cloud, e: &[1, 2], u: &[1, 2], max_distance: 0.6 };
        let s = solve_capacity_lp(&p, 1e-12).unwrap();
        let o = simplex::Scalar::to_f64(&exact_capacity_oracle(&p).unwrap());
        assert!((s.value - o).abs() < 1e-12);
        // two boundary jumps of height 1 across spacing 0.5, each paid by
        // a gradient 2 on one cell of measure 0.5
        assert!((o - 2.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_monotone() {
        let c = Arc::new(MetricCloud::grid(vec![0.0], 0.1, vec![12]).unwrap());
        let cap = |e: &[usize], u: &[usize]| {
            solve_capacity_lp(&CapacityProblem { cloud: &c, e, u, max_distance: f64::INFINITY }, 1e-10)
                .unwrap()
                .value
        };
        let u: Vec<usize> = (2..10).collect();
        assert!(cap(&[5], &u) <= cap(&[5, 6], &u) + 1e-12);
        let u_small: Vec<usize> = (4..8).collect();
        assert!(cap(&[5], &u_small) >= cap(&[5], &u) - 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn homogeneous_and_monotone(seed in 0u64..1000, lambda in 0.1f64..10.0, k in 0usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lp = random_lp(&mut rng, 5);
            let base = solve_min_gradient_p1(&lp, 1e-11).unwrap().value();
            let scaled = MinimalGradientLP::new(
                lp.weights().to_vec(),
                lp.pairs().iter().map(|&(i, j, c)| (i, j, c * lambda)).collect(),
            ).unwrap();
            let s = solve_min_gradient_p1(&scaled, 1e-11).unwrap().value();
            prop_assert!((s - lambda * base).abs() <= 1e-8 * (lambda * base).max(1.0));
            let mut pairs = lp.pairs().to_vec();
            let at = k % pairs.len();
            pairs[at].2 += 0.5;
            let raised = MinimalGradientLP::new(lp.weights().to_vec(), pairs).unwrap();
            let up = solve_min_gradient_p1(&raised, 1e-11).unwrap().value();
            prop_assert!(up >= base - 1e-10);
            let fewer = MinimalGradientLP::new(lp.weights().to_vec(), lp.pairs()[1..].to_vec()).unwrap();
            prop_assert!(solve_min_gradient_p1(&fewer, 1e-11).unwrap().value() <= base + 1e-10);
        }
    }
}
