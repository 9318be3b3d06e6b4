//! Sampled functions on metric point clouds.

mod family;
mod io;
mod maximal;

pub use family::{Profile, TestFamily};
pub use io::{read_binary, read_csv, write_binary, write_csv};
pub use maximal::{
    grand_maximal, hl_maximal, hl_maximal_many, hl_maximal_with, power_maximal_composite,
    smooth_maximal, GrandCap, GrandMaximal, RadiusLadder,
};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::dist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Structure {
    /// Tensor grid, axis 0 varying fastest.
    Grid { origin: Vec<f64>, spacing: f64, counts: Vec<usize> },
    Irregular,
}

/// Points of `R^n` with positive cell measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCloud {
    points: Vec<Vec<f64>>,
    measures: Vec<f64>,
    structure: Structure,
}

impl MetricCloud {
    /// Uniform grid with `counts[k]` nodes along axis `k`; every node carries
    /// measure `spacing^n`.
    pub fn grid(origin: Vec<f64>, spacing: f64, counts: Vec<usize>) -> Result<Self> {
        if !(spacing > 0.0) || counts.is_empty() || counts.iter().any(|&c| c == 0) {
            return Err(Error::Parameter("grid needs positive spacing and counts".into()));
        }
        let n = counts.len();
        let total: usize = counts.iter().product();
        let mut points = Vec::with_capacity(total);
        for mut flat in 0..total {
            let mut p = vec![0.0; n];
            for k in 0..n {
                p[k] = origin[k] + spacing * (flat % counts[k]) as f64;
                flat /= counts[k];
            }
            points.push(p);
        }
        let m = spacing.powi(n as i32);
        Ok(MetricCloud {
            points,
            measures: vec![m; total],
            structure: Structure::Grid { origin, spacing, counts },
        })
    }

    /// Grid over the box `[lo, hi]` with the given spacing (nodes on both ends
    /// when the extent is a multiple of the spacing).
    pub fn grid_over(lo: &[f64], hi: &[f64], spacing: f64) -> Result<Self> {
        let counts =
            lo.iter().zip(hi).map(|(a, b)| ((b - a) / spacing + 1e-9).floor() as usize + 1).collect();
        Self::grid(lo.to_vec(), spacing, counts)
    }

    pub fn irregular(points: Vec<Vec<f64>>, measures: Vec<f64>) -> Result<Self> {
        if points.len() != measures.len() {
            return Err(Error::Parameter("points and measures differ in length".into()));
        }
        if measures.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Parameter("cell measures must be positive".into()));
        }
        if let Some(p) = points.first() {
            if points.iter().any(|q| q.len() != p.len()) {
                return Err(Error::Parameter("mixed point dimensions".into()));
            }
        }
        Ok(MetricCloud { points, measures, structure: Structure::Irregular })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn spacing(&self) -> Option<f64> {
        match &self.structure {
            Structure::Grid { spacing, .. } => Some(*spacing),
            Structure::Irregular => None,
        }
    }

    /// Largest pairwise distance (via the bounding box diagonal, an upper bound).
    pub fn diameter(&self) -> f64 {
        let n = self.dim();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for p in &self.points {
            for k in 0..n {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if self.points.is_empty() {
            0.0
        } else {
            dist(&lo, &hi)
        }
    }

    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| {
            crate::geometry::dist2(&self.points[a], x).total_cmp(&crate::geometry::dist2(&self.points[b], x))
        })
    }

    /// Same cloud with coordinates scaled by `lambda` (measures by `lambda^n`).
    pub fn dilate(&self, lambda: f64) -> MetricCloud {
        let n = self.dim() as i32;
        let points = self.points.iter().map(|p| p.iter().map(|v| v * lambda).collect()).collect();
        let measures = self.measures.iter().map(|m| m * lambda.powi(n)).collect();
        let structure = match &self.structure {
            Structure::Grid { origin, spacing, counts } => Structure::Grid {
                origin: origin.iter().map(|v| v * lambda).collect(),
                spacing: spacing * lambda,
                counts: counts.clone(),
            },
            Structure::Irregular => Structure::Irregular,
        };
        MetricCloud { points, measures, structure }
    }

    /// Sub-cloud on the given indices (structure becomes irregular).
    pub fn restrict(&self, idx: &[usize]) -> MetricCloud {
        MetricCloud {
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            measures: idx.iter().map(|&i| self.measures[i]).collect(),
            structure: Structure::Irregular,
        }
    }
}

/// Real values on a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    cloud: Arc<MetricCloud>,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl SampledField {
    pub fn new(cloud: Arc<MetricCloud>, values: Vec<f64>) -> Result<Self> {
        if values.len() != cloud.len() {
            return Err(Error::Parameter(format!(
                "{} values for a cloud of {} points",
                values.len(),
                cloud.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("field values must be finite".into()));
        }
        Ok(SampledField { cloud, values, mask: None })
    }

    pub fn from_fn(cloud: Arc<MetricCloud>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = cloud.points().iter().map(|p| f(p)).collect();
        Self::new(cloud, values)
    }

    pub fn constant(cloud: Arc<MetricCloud>, c: f64) -> Self {
        let n = cloud.len();
        SampledField { cloud, values: vec![c; n], mask: None }
    }

    /// Marks the support; masked-out values are set to zero.
    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.values.len() {
            return Err(Error::Parameter("mask length mismatch".into()));
        }
        for (v, m) in self.values.iter_mut().zip(&mask) {
            if !m {
                *v = 0.0;
            }
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn cloud(&self) -> &Arc<MetricCloud> {
        &self.cloud
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledField {
        SampledField {
            cloud: self.cloud.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            mask: self.mask.clone(),
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<SampledField> {
        SampledField::new(self.cloud.clone(), values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// `(Σ_i m_i |f_i|^p)^(1/p)`.
pub fn lp_quasinorm(f: &SampledField, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("exponent must be in (0, inf), got {p}")));
    }
    let s: f64 =
        f.values.iter().zip(f.cloud.measures()).map(|(v, m)| m * v.abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// Discrete partial derivatives on a grid: central differences inside,
/// one-sided differences on the faces. One field per axis.
pub fn finite_difference_gradient(f: &SampledField) -> Result<Vec<SampledField>> {
    let Structure::Grid { spacing, counts, .. } = f.cloud.structure() else {
        return Err(Error::Unsupported("finite differences need a uniform grid".into()));
    };
    let n = counts.len();
    let mut strides = vec![1usize; n];
    for k in 1..n {
        strides[k] = strides[k - 1] * counts[k - 1];
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut d = vec![0.0; f.len()];
        if counts[k] > 1 {
            for (i, slot) in d.iter_mut().enumerate() {
                let c = (i / strides[k]) % counts[k];
                let v = &f.values;
                *slot = if c == 0 {
                    (v[i + strides[k]] - v[i]) / spacing
                } else if c == counts[k] - 1 {
                    (v[i] - v[i - strides[k]]) / spacing
                } else {
                    (v[i + strides[k]] - v[i - strides[k]]) / (2.0 * spacing)
                };
            }
        }
        out.push(SampledField::new(f.cloud.clone(), d)?);
    }
    Ok(out)
}

/// Pointwise `max_j |D_j f|`.
pub fn gradient_magnitude_max(parts: &[SampledField]) -> Result<SampledField> {
    let first = parts.first().ok_or_else(|| Error::Parameter("empty gradient".into()))?;
    let vals = (0..first.len())
        .map(|i| parts.iter().map(|p| p.values[i].abs()).fold(0.0, f64::max))
        .collect();
    first.with_values(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Arc<MetricCloud> {
        Arc::new(MetricCloud::grid(vec![0.0], 1.0 / (n - 1) as f64, vec![n]).unwrap())
    }

    #[test]
    fn quasinorm_examples() {
        let c = line(5);
        assert_eq!(lp_quasinorm(&SampledField::constant(c.clone(), 0.0), 0.7).unwrap(), 0.0);
        let unit = Arc::new(MetricCloud::irregular(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]).unwrap());
        for p in [0.5, 1.0, 3.0] {
            let v = lp_quasinorm(&SampledField::constant(unit.clone(), 1.0), p).unwrap();
            assert!((v - 1.0).abs() < 1e-15);
        }
        let two = Arc::new(MetricCloud::irregular(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap());
        let f = SampledField::new(two, vec![1.0, 2.0]).unwrap();
        assert_eq!(lp_quasinorm(&f, 1.0).unwrap(), 3.0);
        assert!(lp_quasinorm(&f, 0.0).is_err());
        assert!(lp_quasinorm(&f, -1.0).is_err());
    }

    #[test]
    fn gradient_of_constant_and_affine() {
        let c = Arc::new(MetricCloud::grid(vec![0.0, 0.0], 0.25, vec![5, 4]).unwrap());
        let g = finite_difference_gradient(&SampledField::constant(c.clone(), 3.0)).unwrap();
        assert!(g.iter().all(|d| d.values().iter().all(|v| *v == 0.0)));
        let f = SampledField::from_fn(c.clone(), |x| 2.0 * x[0] - 0.5 * x[1] + 1.0).unwrap();
        let g = finite_difference_gradient(&f).unwrap();
        for i in 0..c.len() {
            assert!((g[0].values()[i] - 2.0).abs() < 1e-12);
            assert!((g[1].values()[i] + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn central_difference_of_square() {
        let h = 0.1;
        let c = Arc::new(MetricCloud::grid(vec![0.0], h, vec![11]).unwrap());
        let f = SampledField::from_fn(c.clone(), |x| x[0] * x[0]).unwrap();
        let g = finite_difference_gradient(&f).unwrap();
        for i in 1..10 {
            let x0 = c.point(i)[0];
            // ((x+h)^2 - (x-h)^2) / 2h = 2x exactly in exact arithmetic
            assert!((g[0].values()[i] - 2.0 * x0).abs() < 1e-13);
        }
    }

    #[test]
    fn irregular_cloud_has_no_gradient() {
        let c = Arc::new(MetricCloud::irregular(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap());
        let f = SampledField::constant(c, 1.0);
        assert!(matches!(finite_difference_gradient(&f), Err(Error::Unsupported(_))));
    }

    #[test]
    fn mask_zeroes_outside() {
        let f = SampledField::constant(line(3), 2.0).with_mask(vec![true, false, true]).unwrap();
        assert_eq!(f.values(), &[2.0, 0.0, 2.0]);
    }
}
