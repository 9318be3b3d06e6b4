//! Reference functions on `[0, 1]^n` used for calibration and experiments.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::{MetricCloud, SampledField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFn {
    Constant,
    Affine,
    Quadratic,
    Cubic,
    Bump,
    Step,
    BoundaryDistance,
    LogSingular,
    RandomSmoothA,
    RandomSmoothB,
    Sine,
    Kink,
}

pub const CORPUS: [CorpusFn; 12] = [
    CorpusFn::Constant,
    CorpusFn::Affine,
    CorpusFn::Quadratic,
    CorpusFn::Cubic,
    CorpusFn::Bump,
    CorpusFn::Step,
    CorpusFn::BoundaryDistance,
    CorpusFn::LogSingular,
    CorpusFn::RandomSmoothA,
    CorpusFn::RandomSmoothB,
    CorpusFn::Sine,
    CorpusFn::Kink,
];

// Σ a_k sin(2π ω_k·x + φ_k), four seeded modes.
fn random_smooth(seed: u64, x: &[f64]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..4)
        .map(|_| {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let ph: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let arg: f64 = x.iter().map(|v| rng.gen_range(-2.0..2.0) * v).sum::<f64>();
            a * (std::f64::consts::TAU * arg + ph).sin()
        })
        .sum()
}

impl CorpusFn {
    pub fn name(&self) -> &'static str {
        match self {
            CorpusFn::Constant => "constant",
            CorpusFn::Affine => "affine",
            CorpusFn::Quadratic => "quadratic",
            CorpusFn::Cubic => "cubic",
            CorpusFn::Bump => "bump",
            CorpusFn::Step => "step",
            CorpusFn::BoundaryDistance => "boundary_distance",
            CorpusFn::LogSingular => "log_singular",
            CorpusFn::RandomSmoothA => "random_smooth_a",
            CorpusFn::RandomSmoothB => "random_smooth_b",
            CorpusFn::Sine => "sine",
            CorpusFn::Kink => "kink",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        CORPUS.iter().copied().find(|f| f.name() == s)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2 = |c: f64| x.iter().map(|v| (v - c) * (v - c)).sum::<f64>();
        match self {
            CorpusFn::Constant => 1.0,
            CorpusFn::Affine => {
                0.5 + 2.0 * x[0] - x.get(1).copied().unwrap_or(0.0)
            }
            CorpusFn::Quadratic => x.iter().map(|v| v * v).sum(),
            CorpusFn::Cubic => x.iter().map(|v| v * v * v - v).sum(),
            CorpusFn::Bump => (-r2(0.5) / 0.02).exp(),
            CorpusFn::Step => {
                let s = x[0] + 0.3 * x.get(1).copied().unwrap_or(0.0);
                if s >= 0.43 + 0.15 * (x.len() as f64 - 1.0) {
                    1.0
                } else {
                    0.0
                }
            }
            CorpusFn::BoundaryDistance => x.iter().map(|v| v.min(1.0 - v)).fold(f64::INFINITY, f64::min),
            CorpusFn::LogSingular => {
                let r = r2(0.0).sqrt();
                if r == 0.0 {
                    0.0
                } else {
                    1.0 / (std::f64::consts::E / r).ln()
                }
            }
            CorpusFn::RandomSmoothA => random_smooth(1, x),
            CorpusFn::RandomSmoothB => random_smooth(2, x),
            CorpusFn::Sine => {
                (std::f64::consts::TAU * x[0]).sin()
                    * x.get(1).map_or(1.0, |y| (std::f64::consts::PI * y).cos())
            }
            CorpusFn::Kink => (x[0] - 0.3).abs() + x.get(1).map_or(0.0, |y| 0.5 * (y - 0.6).abs()),
        }
    }

    pub fn sample(&self, cloud: &Arc<MetricCloud>) -> Result<SampledField> {
        SampledField::from_fn(cloud.clone(), |x| self.eval(x))
    }
}

/// `f · w` with the window `w(x) = Π_k b((x_k − ½)/(½ − margin))`, `b` the
/// polynomial bump, so the product vanishes outside `(margin, 1 − margin)^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windowed {
    pub base: CorpusFn,
    pub margin: f64,
}

impl Windowed {
    pub fn name(&self) -> String {
        format!("{}@{}", self.base.name(), self.margin)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let half = 0.5 - self.margin;
        let w: f64 = x.iter().map(|v| crate::geometry::bump(((v - 0.5) / half).powi(2))).product();
        if w == 0.0 {
            0.0
        } else {
            w * self.base.eval(x)
        }
    }

    pub fn sample(&self, cloud: &Arc<MetricCloud>) -> Result<SampledField> {
        SampledField::from_fn(cloud.clone(), |x| self.eval(x))
    }
}

/// Twenty compactly supported test functions: the whole corpus windowed at
/// margin 0.1, and the eight smooth non-constant members at margin 0.25.
pub fn windowed_corpus() -> Vec<Windowed> {
    let wide = CORPUS.iter().map(|&base| Windowed { base, margin: 0.1 });
    let narrow = [
        CorpusFn::Affine,
        CorpusFn::Quadratic,
        CorpusFn::Cubic,
        CorpusFn::Bump,
        CorpusFn::BoundaryDistance,
        CorpusFn::RandomSmoothA,
        CorpusFn::RandomSmoothB,
        CorpusFn::Sine,
    ]
    .into_iter()
    .map(|base| Windowed { base, margin: 0.25 });
    wide.chain(narrow).collect()
}

/// Grid on `[0, 1]^n` with `resolution` cells per axis.
pub fn unit_grid(n: usize, resolution: usize) -> Result<Arc<MetricCloud>> {
    Ok(Arc::new(MetricCloud::grid(vec![0.0; n], 1.0 / resolution as f64, vec![resolution + 1; n])?))
}
