//! Exact vertex enumeration of `{x ≥ 0 : A x ≥ b}` by the double-description
//! method on the homogenized cone `{(x, t) ≥ 0 : A x − b t ≥ 0}`.
//!
//! Rays are integer vectors reduced by their gcd; zero sets are bitmasks over
//! the constraints processed so far, and adjacency uses the combinatorial
//! test (no third ray vanishing on the common zero set).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::simplex::LinearProgram;
use crate::error::{Error, Result};

struct Ray {
    v: Vec<BigInt>,
    zeros: u128,
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

fn integer_row(coeffs: &[BigRational]) -> Vec<BigInt> {
    let l = coeffs.iter().fold(BigInt::from(1), |acc, c| acc.lcm(c.denom()));
    coeffs.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect()
}

fn reduce(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
    v
}

/// All vertices of `{x ≥ 0 : rows}` as exact rationals, sorted
/// lexicographically.
pub fn enumerate_vertices(lp: &LinearProgram) -> Result<Vec<Vec<BigRational>>> {
    let n = lp.costs.len();
    let d = n + 1;
    if d + lp.rows.len() > 128 {
        return Err(Error::Size { vars: n, limit: 128 - lp.rows.len().min(127) });
    }
    let rows: Vec<Vec<BigInt>> = lp
        .rows
        .iter()
        .map(|r| {
            let mut c = vec![BigRational::zero(); d];
            for (k, a) in &r.coeffs {
                c[*k] += exact(*a);
            }
            c[n] = -exact(r.rhs);
            integer_row(&c)
        })
        .collect();
    let all_orthant: u128 = (1u128 << d) - 1;
    let mut rays: Vec<Ray> = (0..d)
        .map(|k| {
            let mut v = vec![BigInt::zero(); d];
            v[k] = BigInt::from(1);
            Ray { v, zeros: all_orthant & !(1u128 << k) }
        })
        .collect();
    for (j, a) in rows.iter().enumerate() {
        let bit = 1u128 << (d + j);
        let s: Vec<BigInt> =
            rays.iter().map(|r| r.v.iter().zip(a).map(|(x, y)| x * y).sum()).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| s[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| s[i].is_negative()).collect();
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].zeros & rays[q].zeros;
                if (common.count_ones() as usize) + 2 < d {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != q && r.zeros & common == common);
                if blocked {
                    continue;
                }
                let v: Vec<BigInt> =
                    rays[q].v.iter().zip(&rays[p].v).map(|(vq, vp)| &s[p] * vq - &s[q] * vp).collect();
                fresh.push(Ray { v: reduce(v), zeros: common | bit });
            }
        }
        let mut next = Vec::with_capacity(rays.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if s[i].is_zero() {
                r.zeros |= bit;
                next.push(r);
            } else if s[i].is_positive() {
                next.push(r);
            }
        }
        next.extend(fresh);
        rays = next;
    }
    let mut out: Vec<Vec<BigRational>> = rays
        .into_iter()
        .filter(|r| r.v[n].is_positive())
        .map(|r| {
            let t = r.v[n].clone();
            r.v[..n].iter().map(|x| BigRational::new(x.clone(), t.clone())).collect()
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Exact minimum of `c·x` over the polyhedron (`None` if it is empty).
pub fn exact_minimum(lp: &LinearProgram) -> Result<Option<BigRational>> {
    let c: Vec<BigRational> = lp.costs.iter().map(|v| exact(*v)).collect();
    Ok(enumerate_vertices(lp)?
        .iter()
        .map(|x| x.iter().zip(&c).map(|(a, b)| a * b).sum::<BigRational>())
        .min())
}
