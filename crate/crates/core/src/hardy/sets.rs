//! Target sets for content and capacity experiments.

use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `m + 1` equally spaced points on the segment `[a, b]`.
pub fn segment(a: &[f64], b: &[f64], m: usize) -> Result<Vec<Vec<f64>>> {
    if a.len() != b.len() || m == 0 {
        return Err(Error::Parameter("segment needs matching endpoints and m ≥ 1".into()));
    }
    Ok((0..=m)
        .map(|k| {
            let t = k as f64 / m as f64;
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        })
        .collect())
}

/// Boundary of `[lo, lo + side]^2`, `m` points per edge.
pub fn square_boundary(lo: [f64; 2], side: f64, m: usize) -> Result<Vec<Vec<f64>>> {
    if !(side > 0.0) || m == 0 {
        return Err(Error::Parameter("square needs a positive side and m ≥ 1".into()));
    }
    let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut out = Vec::with_capacity(4 * m);
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        for k in 0..m {
            let t = k as f64 / m as f64;
            out.push(vec![lo[0] + side * (a[0] + t * (b[0] - a[0])), lo[1] + side * (a[1] + t * (b[1] - a[1]))]);
        }
    }
    Ok(out)
}

/// Iterated removal in `[0, 1]^n`: each cube splits into `3^n` subcubes and
/// keeps `keep` of them, chosen by `seed`; the output is the centers of the
/// cubes at the last level. `keep = 2^n` with corner choice gives the
/// middle-thirds dust.
pub fn cantor_dust(n: usize, levels: usize, keep: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let total = 3usize.pow(n as u32);
    if n == 0 || keep == 0 || keep > total {
        return Err(Error::Parameter(format!("need 1 ≤ keep ≤ 3^n, got keep = {keep}")));
    }
    let count = keep.checked_pow(levels as u32).unwrap_or(usize::MAX);
    if count > 1 << 20 {
        return Err(Error::Parameter(format!("{count} cubes is too many")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cubes: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; n], 1.0)];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(cubes.len() * keep);
        for (lo, side) in &cubes {
            let s = side / 3.0;
            // partial Fisher–Yates picks `keep` distinct subcubes
            let mut idx: Vec<usize> = (0..total).collect();
            for k in 0..keep {
                let j = rng.gen_range(k..total);
                idx.swap(k, j);
            }
            let mut chosen = idx[..keep].to_vec();
            chosen.sort_unstable();
            for mut c in chosen {
                let mut corner = lo.clone();
                for v in corner.iter_mut() {
                    *v += s * (c % 3) as f64;
                    c /= 3;
                }
                next.push((corner, s));
            }
        }
        cubes = next;
    }
    Ok(cubes.into_iter().map(|(lo, s)| lo.iter().map(|v| v + s / 2.0).collect()).collect())
}

/// Point list from CSV with one coordinate per column and a header row.
pub fn read_points_csv<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let p = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Format(format!("row {}: {e}", line + 1)))?;
        if p.iter().any(|v| !v.is_finite()) || out.first().map_or(false, |q| q.len() != p.len()) {
            return Err(Error::Format(format!("row {}: bad point", line + 1)));
        }
        out.push(p);
    }
    Ok(out)
}
