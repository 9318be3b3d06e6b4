use serde::{Deserialize, Serialize};

use super::{dist, dist2};
use crate::error::{Error, Result};

/// Axis-aligned computational window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Self {
        BoundingBox { min, max }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.min).zip(&self.max).all(|((v, lo), hi)| *v >= *lo && *v <= *hi)
    }

    pub fn diameter(&self) -> f64 {
        dist(&self.min, &self.max)
    }
}

/// What is cut out of the window by a complement-type domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RemovedSet {
    /// The closure of another (bounded) shape.
    Shape { shape: Box<DomainKind> },
    /// A finite point set.
    Points { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    /// Open box `∏ (min_k, max_k)`.
    Rectangle { min: Vec<f64>, max: Vec<f64> },
    /// Open simple polygon, vertices in either orientation.
    Polygon { vertices: Vec<[f64; 2]> },
    /// Planar subgraph `{(y, t) : t < h(y)}`; `h` is sampled uniformly on
    /// `[y_min, y_max]` and linearly interpolated (constant outside).
    LipschitzGraph { y_min: f64, y_max: f64, samples: Vec<f64>, lipschitz: f64 },
    /// `R^n` minus the closure of a set.
    Complement { removed: RemovedSet },
}

/// A domain together with the window it is studied in.
///
/// The JSON form is flat: `{"kind": "rectangle", "min": .., "max": .., "bbox": {..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainShape {
    #[serde(flatten)]
    pub kind: DomainKind,
    pub bbox: BoundingBox,
}

type Seg = ([f64; 2], [f64; 2]);

fn closest_on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    if l2 == 0.0 {
        return a;
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / l2).clamp(0.0, 1.0);
    [a[0] + t * ab[0], a[1] + t * ab[1]]
}

fn closest_on_segments(p: [f64; 2], segs: impl Iterator<Item = Seg>) -> ([f64; 2], f64) {
    let mut best = ([f64::NAN; 2], f64::INFINITY);
    for (a, b) in segs {
        let q = closest_on_segment(p, a, b);
        let d2 = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
        if d2 < best.1 {
            best = (q, d2);
        }
    }
    (best.0, best.1.sqrt())
}

fn polygon_edges(v: &[[f64; 2]]) -> impl Iterator<Item = Seg> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

/// Even-odd crossing test; boundary points may land on either side.
fn polygon_contains(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = v.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn as2(x: &[f64]) -> Result<[f64; 2]> {
    if x.len() != 2 {
        return Err(Error::Domain(format!("expected a planar point, got dimension {}", x.len())));
    }
    Ok([x[0], x[1]])
}

impl DomainKind {
    pub fn dim(&self) -> usize {
        match self {
            DomainKind::Rectangle { min, .. } => min.len(),
            DomainKind::Polygon { .. } | DomainKind::LipschitzGraph { .. } => 2,
            DomainKind::Complement { removed } => match removed {
                RemovedSet::Shape { shape } => shape.dim(),
                RemovedSet::Points { points } => points.first().map_or(0, |p| p.len()),
            },
        }
    }

    fn graph_nodes(y_min: f64, y_max: f64, samples: &[f64]) -> Vec<[f64; 2]> {
        let m = samples.len();
        let step = if m > 1 { (y_max - y_min) / (m - 1) as f64 } else { 0.0 };
        let far = 1e6 * (1.0 + (y_max - y_min).abs());
        let mut nodes = Vec::with_capacity(m + 2);
        nodes.push([y_min - far, samples[0]]);
        for (k, h) in samples.iter().enumerate() {
            nodes.push([y_min + step * k as f64, *h]);
        }
        nodes.push([y_max + far, samples[m - 1]]);
        nodes
    }

    /// Interpolated graph height (constant continuation outside the samples).
    pub fn graph_height(&self, y: f64) -> Option<f64> {
        let DomainKind::LipschitzGraph { y_min, y_max, samples, .. } = self else {
            return None;
        };
        let m = samples.len();
        if m == 1 || y <= *y_min {
            return Some(samples[0]);
        }
        if y >= *y_max {
            return Some(samples[m - 1]);
        }
        let s = (y - y_min) / (y_max - y_min) * (m - 1) as f64;
        let k = (s.floor() as usize).min(m - 2);
        let w = s - k as f64;
        Some(samples[k] * (1.0 - w) + samples[k + 1] * w)
    }

    /// Interior membership (open set).
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainKind::Rectangle { min, max } => {
                x.iter().zip(min).zip(max).all(|((v, lo), hi)| *v > *lo && *v < *hi)
            }
            DomainKind::Polygon { vertices } => {
                let Ok(p) = as2(x) else { return false };
                polygon_contains(vertices, p) && self.boundary_distance_raw(x) > 0.0
            }
            DomainKind::LipschitzGraph { .. } => x[1] < self.graph_height(x[0]).unwrap(),
            DomainKind::Complement { removed } => match removed {
                RemovedSet::Shape { shape } => {
                    !shape.contains(x) && shape.boundary_distance_raw(x) > 0.0
                }
                RemovedSet::Points { points } => points.iter().all(|p| dist2(p, x) > 0.0),
            },
        }
    }

    /// Nearest point of the boundary and the distance to it.
    pub fn nearest_boundary_point(&self, x: &[f64]) -> (Vec<f64>, f64) {
        match self {
            DomainKind::Rectangle { min, max } => {
                let inside = x.iter().zip(min).zip(max).all(|((v, lo), hi)| *v >= *lo && *v <= *hi);
                if inside {
                    let mut best = (0usize, *x.first().unwrap_or(&0.0), f64::INFINITY);
                    for k in 0..x.len() {
                        let dl = x[k] - min[k];
                        let dh = max[k] - x[k];
                        if dl < best.2 {
                            best = (k, min[k], dl);
                        }
                        if dh < best.2 {
                            best = (k, max[k], dh);
                        }
                    }
                    let mut q = x.to_vec();
                    q[best.0] = best.1;
                    (q, best.2)
                } else {
                    let q: Vec<f64> = x
                        .iter()
                        .zip(min)
                        .zip(max)
                        .map(|((v, lo), hi)| v.clamp(*lo, *hi))
                        .collect();
                    let d = dist(&q, x);
                    (q, d)
                }
            }
            DomainKind::Polygon { vertices } => {
                let p = [x[0], x[1]];
                let (q, d) = closest_on_segments(p, polygon_edges(vertices));
                (q.to_vec(), d)
            }
            DomainKind::LipschitzGraph { y_min, y_max, samples, .. } => {
                let nodes = Self::graph_nodes(*y_min, *y_max, samples);
                let p = [x[0], x[1]];
                let (q, d) = closest_on_segments(p, nodes.windows(2).map(|w| (w[0], w[1])));
                (q.to_vec(), d)
            }
            DomainKind::Complement { removed } => match removed {
                RemovedSet::Shape { shape } => shape.nearest_boundary_point(x),
                RemovedSet::Points { points } => {
                    let mut best = (x.to_vec(), f64::INFINITY);
                    for p in points {
                        let d = dist(p, x);
                        if d < best.1 {
                            best = (p.clone(), d);
                        }
                    }
                    best
                }
            },
        }
    }

    fn boundary_distance_raw(&self, x: &[f64]) -> f64 {
        self.nearest_boundary_point(x).1
    }

    /// Extent of the boundary, `None` when it is unbounded (graphs).
    pub fn boundary_extent(&self) -> Option<BoundingBox> {
        match self {
            DomainKind::Rectangle { min, max } => Some(BoundingBox::new(min.clone(), max.clone())),
            DomainKind::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                Some(BoundingBox::new(lo.to_vec(), hi.to_vec()))
            }
            DomainKind::LipschitzGraph { .. } => None,
            DomainKind::Complement { removed } => match removed {
                RemovedSet::Shape { shape } => shape.boundary_extent(),
                RemovedSet::Points { points } => {
                    let n = points.first()?.len();
                    let mut lo = vec![f64::INFINITY; n];
                    let mut hi = vec![f64::NEG_INFINITY; n];
                    for p in points {
                        for k in 0..n {
                            lo[k] = lo[k].min(p[k]);
                            hi[k] = hi[k].max(p[k]);
                        }
                    }
                    Some(BoundingBox::new(lo, hi))
                }
            },
        }
    }
}

impl DomainShape {
    pub fn new(kind: DomainKind, bbox: BoundingBox) -> Result<Self> {
        let d = DomainShape { kind, bbox };
        d.validate()?;
        Ok(d)
    }

    /// Open box `(min, max)` with a window padded by `pad` on every side.
    pub fn rectangle(min: Vec<f64>, max: Vec<f64>, pad: f64) -> Self {
        let bbox = BoundingBox::new(
            min.iter().map(|v| v - pad).collect(),
            max.iter().map(|v| v + pad).collect(),
        );
        DomainShape { kind: DomainKind::Rectangle { min, max }, bbox }
    }

    /// Unit square `(0,1)^2` in the window `[-pad, 1+pad]^2`.
    pub fn unit_square(pad: f64) -> Self {
        Self::rectangle(vec![0.0, 0.0], vec![1.0, 1.0], pad)
    }

    pub fn polygon(vertices: Vec<[f64; 2]>, pad: f64) -> Result<Self> {
        let kind = DomainKind::Polygon { vertices };
        let ext = kind.boundary_extent().expect("polygons are bounded");
        let bbox = BoundingBox::new(
            ext.min.iter().map(|v| v - pad).collect(),
            ext.max.iter().map(|v| v + pad).collect(),
        );
        Self::new(kind, bbox)
    }

    /// Regular `m`-gon inscribed in the circle of given center and radius.
    pub fn regular_polygon(center: [f64; 2], radius: f64, m: usize, pad: f64) -> Result<Self> {
        let vertices = (0..m)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            })
            .collect();
        Self::polygon(vertices, pad)
    }

    /// Subgraph of a function sampled on `[y_min, y_max]`; the declared
    /// Lipschitz constant is checked against the sample slopes.
    pub fn lipschitz_graph(
        y_min: f64,
        y_max: f64,
        samples: Vec<f64>,
        lipschitz: f64,
        bbox: BoundingBox,
    ) -> Result<Self> {
        Self::new(DomainKind::LipschitzGraph { y_min, y_max, samples, lipschitz }, bbox)
    }

    pub fn dim(&self) -> usize {
        self.bbox.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bbox.min.len() != self.bbox.max.len()
            || self.bbox.min.iter().zip(&self.bbox.max).any(|(a, b)| !(a < b))
        {
            return Err(Error::Domain("malformed bounding box".into()));
        }
        if self.kind.dim() != self.dim() {
            return Err(Error::Domain(format!(
                "shape dimension {} does not match window dimension {}",
                self.kind.dim(),
                self.dim()
            )));
        }
        match &self.kind {
            DomainKind::Rectangle { min, max } => {
                if min.len() != max.len() || min.iter().zip(max).any(|(a, b)| !(a < b)) {
                    return Err(Error::Domain("rectangle with empty interior".into()));
                }
            }
            DomainKind::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::Domain("polygon needs at least 3 vertices".into()));
                }
            }
            DomainKind::LipschitzGraph { y_min, y_max, samples, lipschitz } => {
                if samples.is_empty() || !(y_min < y_max) || samples.len() < 2 {
                    return Err(Error::Domain("graph needs >= 2 samples on a proper interval".into()));
                }
                let step = (y_max - y_min) / (samples.len() - 1) as f64;
                for w in samples.windows(2) {
                    let slope = (w[1] - w[0]).abs() / step;
                    if slope > lipschitz * (1.0 + 1e-12) {
                        return Err(Error::Domain(format!(
                            "sample slope {slope} exceeds declared Lipschitz constant {lipschitz}"
                        )));
                    }
                }
            }
            DomainKind::Complement { removed } => {
                if let RemovedSet::Points { points } = removed {
                    if points.is_empty() {
                        return Err(Error::Domain("complement of an empty point set".into()));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_window(&self, x: &[f64]) -> Result<()> {
        if !self.bbox.contains(x) {
            return Err(Error::Domain(format!("point {x:?} outside the bounding box")));
        }
        Ok(())
    }

    /// `d(x, ∂Ω)`. Exact for rectangles, polygons and point complements; for
    /// graphs, exact with respect to the piecewise-linear interpolant.
    pub fn distance_to_boundary(&self, x: &[f64]) -> Result<f64> {
        self.check_window(x)?;
        Ok(self.kind.nearest_boundary_point(x).1)
    }

    pub fn nearest_boundary_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_window(x)?;
        Ok(self.kind.nearest_boundary_point(x).0)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.kind.contains(x)
    }

    /// Distance from the domain: zero inside or on the boundary.
    pub fn distance_to_domain(&self, x: &[f64]) -> Result<f64> {
        let d = self.distance_to_boundary(x)?;
        Ok(if self.contains(x) { 0.0 } else { d })
    }

    pub fn is_convex(&self) -> bool {
        match &self.kind {
            DomainKind::Rectangle { .. } => true,
            DomainKind::Polygon { vertices } => {
                let n = vertices.len();
                let mut sign = 0.0f64;
                for i in 0..n {
                    let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
                    let cr = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if cr != 0.0 {
                        if sign != 0.0 && cr.signum() != sign {
                            return false;
                        }
                        sign = cr.signum();
                    }
                }
                true
            }
            DomainKind::LipschitzGraph { samples, .. } => {
                // concave h gives a convex subgraph
                samples.windows(3).all(|w| w[0] + w[2] <= 2.0 * w[1] + 1e-15)
            }
            DomainKind::Complement { .. } => false,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: DomainShape = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("domain serializes")
    }
}
