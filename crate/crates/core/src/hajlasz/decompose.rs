//! Mean-zero test functions as sums of forward differences.
//!
//! With `Δ_k ψ(x) = (ψ(x + h e_k) − ψ(x)) / h` (zero continuation past the
//! grid), a mean-zero `φ` supported strictly inside the grid is written as
//! `Σ_k Δ_k ψ_k` by induction on the dimension: sum out the last axis to get
//! `s(x′)`, take a running sum of `φ − a(t) s(x′)` along that axis for `ψ_n`,
//! decompose `s` one dimension down and multiply the pieces by the fixed
//! unit-mass profile `a`.

use crate::error::{Error, Result};
use crate::field::{SampledField, Structure};

pub fn mean_zero_decompose(phi: &SampledField) -> Result<Vec<SampledField>> {
    let Structure::Grid { spacing, counts, .. } = phi.cloud().structure() else {
        return Err(Error::Unsupported("decomposition needs a uniform grid".into()));
    };
    let h = *spacing;
    let v = phi.values();
    let mass: f64 = v.iter().sum::<f64>() * h.powi(counts.len() as i32);
    let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>() * h.powi(counts.len() as i32);
    if mass.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::Precondition(format!("field has mass {mass:e}, not zero")));
    }
    if counts.iter().any(|&c| c < 3) {
        return Err(Error::Parameter("every axis needs at least three nodes".into()));
    }
    let strides = strides(counts);
    for (i, x) in v.iter().enumerate() {
        if *x != 0.0 && on_face(i, counts, &strides) {
            return Err(Error::Domain("support touches the cube face".into()));
        }
    }
    let parts = decompose(v, counts, h);
    parts.into_iter().map(|p| phi.with_values(p)).collect()
}

fn strides(counts: &[usize]) -> Vec<usize> {
    let mut s = vec![1; counts.len()];
    for k in 1..counts.len() {
        s[k] = s[k - 1] * counts[k - 1];
    }
    s
}

fn on_face(i: usize, counts: &[usize], strides: &[usize]) -> bool {
    counts.iter().zip(strides).any(|(&c, &s)| {
        let t = (i / s) % c;
        t == 0 || t == c - 1
    })
}

// Unit mass, zero on both end nodes.
fn profile(len: usize, h: f64) -> Vec<f64> {
    let inner = (len - 2) as f64;
    (0..len).map(|t| if t == 0 || t == len - 1 { 0.0 } else { 1.0 / (inner * h) }).collect()
}

fn decompose(phi: &[f64], counts: &[usize], h: f64) -> Vec<Vec<f64>> {
    let n = counts.len();
    let last = counts[n - 1];
    let inner: usize = counts[..n - 1].iter().product();
    // axis n-1 is the slowest: index = x' + inner * t
    let mut s = vec![0.0; inner];
    for t in 0..last {
        for xp in 0..inner {
            s[xp] += phi[xp + inner * t] * h;
        }
    }
    let a = profile(last, h);
    let mut psi_last = vec![0.0; phi.len()];
    for xp in 0..inner {
        let mut run = 0.0;
        // the sum over the last node vanishes exactly by construction; pin
        // it so that round-off does not leak onto the face
        for t in 0..last - 1 {
            psi_last[xp + inner * t] = run;
            run += h * (phi[xp + inner * t] - a[t] * s[xp]);
        }
    }
    let mut out = Vec::with_capacity(n);
    if n > 1 {
        for chi in decompose(&s, &counts[..n - 1], h) {
            let mut psi = vec![0.0; phi.len()];
            for t in 0..last {
                for xp in 0..inner {
                    psi[xp + inner * t] = a[t] * chi[xp];
                }
            }
            out.push(psi);
        }
    }
    out.push(psi_last);
    out
}

/// `Σ_k Δ_k ψ_k` with forward differences and zero continuation.
pub fn divergence(parts: &[SampledField]) -> Result<Vec<f64>> {
    let first = parts.first().ok_or_else(|| Error::Parameter("no components".into()))?;
    let Structure::Grid { spacing, counts, .. } = first.cloud().structure() else {
        return Err(Error::Unsupported("divergence needs a uniform grid".into()));
    };
    let st = strides(counts);
    let mut out = vec![0.0; first.len()];
    for (k, psi) in parts.iter().enumerate() {
        let v = psi.values();
        for (i, o) in out.iter_mut().enumerate() {
            let t = (i / st[k]) % counts[k];
            let next = if t + 1 < counts[k] { v[i + st[k]] } else { 0.0 };
            *o += (next - v[i]) / spacing;
        }
    }
    Ok(out)
}
