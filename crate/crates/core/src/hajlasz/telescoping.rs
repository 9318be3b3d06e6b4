use serde::{Deserialize, Serialize};

use super::maximal_derivative_capped;
use crate::error::{Error, Result};
use crate::field::{SampledField, Structure};
use crate::geometry::{bump, dist2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelescopingReport {
    /// Mollification scales `2|x−y| / 2^k` down to two grid spacings.
    pub scales: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `|A_k − A_{k+1}|` and `|B_k − B_{k+1}|`.
    pub diffs_x: Vec<f64>,
    pub diffs_y: Vec<f64>,
    /// Successive ratios of the differences (`None` where the previous one
    /// vanishes).
    pub decay_x: Vec<Option<f64>>,
    pub decay_y: Vec<Option<f64>>,
    /// `|f(x) − f(y)| / (|x−y| (M Df(x) + M Df(y)))` with the maximal
    /// function capped at `|x−y|`; `None` for 0/0.
    pub c_hat: Option<f64>,
    pub degenerate: bool,
    /// Smallest `k0` with `2^(k0−1) ≥ √n`, for comparison with the number
    /// of scales the grid actually resolves.
    pub k0: u32,
}

fn mollify(f: &SampledField, x: usize, t: f64) -> f64 {
    let c = f.cloud();
    let p = c.point(x);
    let (mut s, mut w) = (0.0, 0.0);
    for (j, q) in c.points().iter().enumerate() {
        let z2 = dist2(p, q) / (t * t);
        if z2 < 1.0 {
            let b = c.measures()[j] * bump(z2);
            s += b * f.values()[j];
            w += b;
        }
    }
    s / w
}

fn decay(d: &[f64]) -> Vec<Option<f64>> {
    d.windows(2).map(|w| if w[0] > 0.0 { Some(w[1] / w[0]) } else { None }).collect()
}

/// Dyadic mollified averages around two grid points and the empirical
/// constant of the two-point estimate.
pub fn telescoping_bound_check(f: &SampledField, x: usize, y: usize) -> Result<TelescopingReport> {
    let Structure::Grid { spacing, counts, .. } = f.cloud().structure() else {
        return Err(Error::Unsupported("telescoping check needs a uniform grid".into()));
    };
    let c = f.cloud();
    if x >= c.len() || y >= c.len() {
        return Err(Error::Parameter("point index out of range".into()));
    }
    let r = dist2(c.point(x), c.point(y)).sqrt();
    if r < 2.0 * spacing {
        return Err(Error::Parameter(format!("|x−y| = {r} is below two grid spacings")));
    }
    let mut scales = Vec::new();
    let mut t = 2.0 * r;
    while t >= 2.0 * spacing {
        scales.push(t);
        t /= 2.0;
    }
    let a: Vec<f64> = scales.iter().map(|&t| mollify(f, x, t)).collect();
    let b: Vec<f64> = scales.iter().map(|&t| mollify(f, y, t)).collect();
    let diffs = |v: &[f64]| v.windows(2).map(|w| (w[0] - w[1]).abs()).collect::<Vec<_>>();
    let (diffs_x, diffs_y) = (diffs(&a), diffs(&b));
    let m = maximal_derivative_capped(f, r)?;
    let num = (f.values()[x] - f.values()[y]).abs();
    let den = r * (m.values()[x] + m.values()[y]);
    let c_hat = if den > 0.0 {
        Some(num / den)
    } else if num == 0.0 {
        None
    } else {
        Some(f64::INFINITY)
    };
    let n = counts.len() as f64;
    let mut k0 = 0u32;
    while 2f64.powi(k0 as i32 - 1) < n.sqrt() {
        k0 += 1;
    }
    Ok(TelescopingReport {
        decay_x: decay(&diffs_x),
        decay_y: decay(&diffs_y),
        scales,
        a,
        b,
        diffs_x,
        diffs_y,
        degenerate: c_hat.is_none(),
        c_hat,
        k0,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::field::MetricCloud;

    fn line(k: usize) -> Arc<MetricCloud> {
        Arc::new(MetricCloud::grid(vec![0.0], 1.0 / (k - 1) as f64, vec![k]).unwrap())
    }

    #[test]
    fn affine_averages_are_constant() {
        let c = line(129);
        let f = SampledField::from_fn(c, |x| 3.0 * x[0] - 1.0).unwrap();
        let r = telescoping_bound_check(&f, 56, 72).unwrap();
        assert!(r.diffs_x.iter().chain(&r.diffs_y).all(|d| *d < 1e-12));
        assert!((r.a[0] - f.values()[56]).abs() < 1e-12);
        assert!(r.c_hat.unwrap() <= 0.5 + 1e-12);
        assert_eq!(r.k0, 1);
    }

    #[test]
    fn constant_is_degenerate() {
        let f = SampledField::constant(line(33), 2.0);
        let r = telescoping_bound_check(&f, 10, 20).unwrap();
        assert!(r.degenerate && r.c_hat.is_none());
        assert!(telescoping_bound_check(&f, 10, 11).is_err());
    }

    #[test]
    fn bump_pairs_are_uniformly_bounded() {
        let c = line(64);
        let f = SampledField::from_fn(c.clone(), |x| (-(x[0] - 0.5).powi(2) / 0.02).exp()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let (i, j) = loop {
                let i: usize = rng.gen_range(0..64);
                let j = rng.gen_range(0..64);
                if i.abs_diff(j) >= 2 {
                    break (i, j);
                }
            };
            if let Some(ch) = telescoping_bound_check(&f, i, j).unwrap().c_hat {
                worst = worst.max(ch);
            }
        }
        assert!(worst.is_finite() && worst < 2.0, "ĉ = {worst}");
    }
}
