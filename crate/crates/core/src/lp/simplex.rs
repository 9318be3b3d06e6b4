//! Revised simplex for `min c·x  s.t.  A x ≥ b, x ≥ 0` with `c ≥ 0`.
//!
//! The dual `max b·y  s.t.  Aᵀy ≤ c, y ≥ 0` is solved instead: its slack
//! basis is feasible because `c ≥ 0`, so no phase one is needed, and the
//! primal solution comes out as the simplex multipliers.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Pivot/optimality tolerance; zero for exact arithmetic.
    fn eps() -> Self;
    fn exact() -> bool;
    fn abs_val(&self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn eps() -> Self {
        1e-11
    }
    fn exact() -> bool {
        false
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite input")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn eps() -> Self {
        BigRational::zero()
    }
    fn exact() -> bool {
        true
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// One `≥` row with sparse coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `min c·x  s.t.  rows, x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub costs: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn validate(&self) -> Result<()> {
        if self.costs.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::Parameter("costs must be finite and nonnegative".into()));
        }
        for r in &self.rows {
            if !r.rhs.is_finite() || r.coeffs.iter().any(|(k, a)| *k >= self.costs.len() || !a.is_finite()) {
                return Err(Error::Parameter("malformed constraint row".into()));
            }
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest `b_j - a_j·x` (positive means violated).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| r.rhs - r.coeffs.iter().map(|(k, a)| a * x[*k]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct RawSolution<S> {
    pub x: Vec<S>,
    pub y: Vec<S>,
    pub objective: S,
    pub status: Status,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_pivots: usize,
    pub refactor_every: usize,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub degenerate_switch: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_pivots: 200_000, refactor_every: 64, degenerate_switch: 30 }
    }
}

struct Columns<S> {
    // dual column j < rows: row j of A; j >= rows: slack of variable j - rows
    cols: Vec<Vec<(usize, S)>>,
    obj: Vec<S>,
}

pub fn solve<S: Scalar>(lp: &LinearProgram, opts: SimplexOptions) -> Result<RawSolution<S>> {
    lp.validate()?;
    let m = lp.costs.len();
    let p = lp.rows.len();
    let mut cols = Vec::with_capacity(p + m);
    let mut obj = Vec::with_capacity(p + m);
    for r in &lp.rows {
        // merge repeated indices
        let mut c: Vec<(usize, f64)> = r.coeffs.clone();
        c.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, S)> = Vec::new();
        for (k, a) in c {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 = last.1.clone() + S::from_f64(a),
                _ => merged.push((k, S::from_f64(a))),
            }
        }
        cols.push(merged);
        obj.push(S::from_f64(r.rhs));
    }
    for k in 0..m {
        cols.push(vec![(k, S::one())]);
        obj.push(S::zero());
    }
    let data = Columns { cols, obj };
    let rhs: Vec<S> = lp.costs.iter().map(|c| S::from_f64(*c)).collect();
    run(&data, &rhs, p, opts)
}

fn run<S: Scalar>(data: &Columns<S>, c: &[S], p: usize, opts: SimplexOptions) -> Result<RawSolution<S>> {
    let m = c.len();
    let ncols = data.cols.len();
    let mut basis: Vec<usize> = (0..m).map(|k| p + k).collect();
    let mut in_basis = vec![false; ncols];
    for &b in &basis {
        in_basis[b] = true;
    }
    let mut binv: Vec<Vec<S>> =
        (0..m).map(|i| (0..m).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect();
    let mut xb: Vec<S> = c.to_vec();
    let eps = S::eps();
    let mut pivots = 0;
    let mut degenerate = 0;
    let mut status = Status::Optimal;
    loop {
        // simplex multipliers
        let mut pi = vec![S::zero(); m];
        for r in 0..m {
            let cb = &data.obj[basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (k, v) in binv[r].iter().enumerate() {
                pi[k] = pi[k].clone() + cb.clone() * v.clone();
            }
        }
        let bland = S::exact() || degenerate >= opts.degenerate_switch;
        let mut enter: Option<(usize, S)> = None;
        for j in 0..ncols {
            if in_basis[j] {
                continue;
            }
            let mut d = data.obj[j].clone();
            for (k, a) in &data.cols[j] {
                d = d - pi[*k].clone() * a.clone();
            }
            if d > eps {
                match &enter {
                    None => {
                        enter = Some((j, d));
                        if bland {
                            break;
                        }
                    }
                    Some((_, best)) if d > *best => enter = Some((j, d)),
                    _ => {}
                }
            }
        }
        let Some((j, _)) = enter else { break };
        if pivots >= opts.max_pivots {
            status = Status::IterationLimit;
            break;
        }
        let mut alpha = vec![S::zero(); m];
        for (k, a) in &data.cols[j] {
            for (r, al) in alpha.iter_mut().enumerate() {
                if !binv[r][*k].is_zero() {
                    *al = al.clone() + binv[r][*k].clone() * a.clone();
                }
            }
        }
        let mut leave: Option<(usize, S)> = None;
        for r in 0..m {
            if alpha[r] > eps {
                let t = xb[r].clone() / alpha[r].clone();
                let better = match &leave {
                    None => true,
                    Some((lr, lt)) => t < *lt || (t == *lt && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, t));
                }
            }
        }
        let Some((r, t)) = leave else {
            return Err(Error::Solver("dual unbounded: primal constraints infeasible".into()));
        };
        if t <= eps {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        let piv = alpha[r].clone();
        for v in binv[r].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        xb[r] = xb[r].clone() / piv;
        let prow = binv[r].clone();
        let px = xb[r].clone();
        for i in 0..m {
            if i == r || alpha[i].is_zero() {
                continue;
            }
            let f = alpha[i].clone();
            for (v, pr) in binv[i].iter_mut().zip(&prow) {
                if !pr.is_zero() {
                    *v = v.clone() - f.clone() * pr.clone();
                }
            }
            xb[i] = xb[i].clone() - f * px.clone();
        }
        in_basis[basis[r]] = false;
        basis[r] = j;
        in_basis[j] = true;
        pivots += 1;
        if !S::exact() && pivots % opts.refactor_every == 0 {
            refactor(data, &basis, c, &mut binv, &mut xb)?;
        }
    }
    // primal values: multipliers
    let mut x = vec![S::zero(); m];
    for r in 0..m {
        let cb = &data.obj[basis[r]];
        if cb.is_zero() {
            continue;
        }
        for (k, v) in binv[r].iter().enumerate() {
            x[k] = x[k].clone() + cb.clone() * v.clone();
        }
    }
    let mut y = vec![S::zero(); p];
    let mut objective = S::zero();
    for r in 0..m {
        if basis[r] < p {
            y[basis[r]] = xb[r].clone();
            objective = objective + data.obj[basis[r]].clone() * xb[r].clone();
        }
    }
    Ok(RawSolution { x, y, objective, status, pivots })
}

// Rebuild B^{-1} from the basis columns (Gauss–Jordan, partial pivoting).
fn refactor<S: Scalar>(
    data: &Columns<S>,
    basis: &[usize],
    c: &[S],
    binv: &mut [Vec<S>],
    xb: &mut [S],
) -> Result<()> {
    let m = basis.len();
    let mut a = vec![vec![S::zero(); 2 * m]; m];
    for (col, &b) in basis.iter().enumerate() {
        for (k, v) in &data.cols[b] {
            a[*k][col] = v.clone();
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[m + i] = S::one();
    }
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].abs_val().partial_cmp(&a[j][col].abs_val()).unwrap())
            .unwrap();
        if a[piv][col].abs_val() <= S::zero() {
            return Err(Error::Solver("singular basis during refactorization".into()));
        }
        a.swap(piv, col);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let prow = a[col].clone();
        for i in 0..m {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for (v, pr) in a[i].iter_mut().zip(&prow) {
                    *v = v.clone() - f.clone() * pr.clone();
                }
            }
        }
    }
    // a = [I | B^{-1}], rows indexed by basis position
    for (i, row) in a.into_iter().enumerate() {
        binv[i] = row[m..].to_vec();
    }
    for i in 0..m {
        let mut s = S::zero();
        for k in 0..m {
            s = s + binv[i][k].clone() * c[k].clone();
        }
        // clamp round-off below zero
        xb[i] = if s < S::zero() { S::zero() } else { s };
    }
    Ok(())
}
