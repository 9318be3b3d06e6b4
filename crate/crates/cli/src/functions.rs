use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use hardy_sobolev::corpus::{CorpusFn, Windowed};
use hardy_sobolev::geometry::{bump, dist, DomainShape};

use crate::CliError;

/// Named function generators; every parameter lives in the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `offset + slope · x`.
    Affine { slope: Vec<f64>, offset: f64 },
    /// `Σ_k Σ_j c_j x_k^j`.
    Polynomial { coefficients: Vec<f64> },
    /// `b(|x − center|² / radius²)` with the polynomial bump `b`.
    Bump { center: Vec<f64>, radius: f64 },
    /// Indicator of `normal · x ≥ offset`.
    Step { normal: Vec<f64>, offset: f64 },
    /// Distance to the boundary of the configured domain.
    Distance,
    /// `1 / log(e / |x − center|)`, the logarithmic profile of the failing
    /// Hardy example.
    LogProfile { center: Vec<f64> },
    /// `Σ a_k sin(2π ω_k·x + φ_k)` with seeded coefficients.
    RandomSmooth { seed: u64, modes: usize },
    /// A member of the built-in corpus, optionally windowed.
    Corpus { name: String, window: Option<f64> },
}

impl FunctionSpec {
    pub fn name(&self) -> String {
        match self {
            FunctionSpec::Affine { .. } => "affine".into(),
            FunctionSpec::Polynomial { .. } => "polynomial".into(),
            FunctionSpec::Bump { .. } => "bump".into(),
            FunctionSpec::Step { .. } => "step".into(),
            FunctionSpec::Distance => "distance".into(),
            FunctionSpec::LogProfile { .. } => "log_profile".into(),
            FunctionSpec::RandomSmooth { seed, .. } => format!("random_smooth_{seed}"),
            FunctionSpec::Corpus { name, window: None } => name.clone(),
            FunctionSpec::Corpus { name, window: Some(m) } => format!("{name}@{m}"),
        }
    }

    /// The twelve corpus members by name.
    pub fn standard() -> Vec<FunctionSpec> {
        hardy_sobolev::corpus::CORPUS
            .iter()
            .map(|f| FunctionSpec::Corpus { name: f.name().into(), window: None })
            .collect()
    }

    /// The twenty compactly supported windowed corpus members.
    pub fn windowed() -> Vec<FunctionSpec> {
        hardy_sobolev::corpus::windowed_corpus()
            .iter()
            .map(|w| FunctionSpec::Corpus { name: w.base.name().into(), window: Some(w.margin) })
            .collect()
    }

    pub fn validate(&self, dim: usize) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(format!("{}: {m}", self.name())));
        match self {
            FunctionSpec::Affine { slope, .. } if slope.len() != dim => bad("slope has the wrong dimension".into()),
            FunctionSpec::Step { normal, .. } if normal.len() != dim => bad("normal has the wrong dimension".into()),
            FunctionSpec::Bump { center, radius } if center.len() != dim || !(*radius > 0.0) => {
                bad("needs a center of the right dimension and a positive radius".into())
            }
            FunctionSpec::LogProfile { center } if center.len() != dim => bad("center has the wrong dimension".into()),
            FunctionSpec::RandomSmooth { modes, .. } if *modes == 0 => bad("needs at least one mode".into()),
            FunctionSpec::Corpus { name, window } => {
                if CorpusFn::from_name(name).is_none() {
                    return bad(format!("unknown corpus function '{name}'"));
                }
                match window {
                    Some(m) if !(*m >= 0.0 && *m < 0.5) => bad(format!("window margin {m} outside [0, 1/2)")),
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// Evaluator closed over the domain (used only by `Distance`).
    pub fn evaluator(&self, domain: &DomainShape) -> Box<dyn Fn(&[f64]) -> f64 + Send + Sync> {
        match self.clone() {
            FunctionSpec::Affine { slope, offset } => {
                Box::new(move |x| offset + slope.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
            }
            FunctionSpec::Polynomial { coefficients } => Box::new(move |x| {
                x.iter().map(|v| coefficients.iter().rev().fold(0.0, |acc, c| acc * v + c)).sum()
            }),
            FunctionSpec::Bump { center, radius } => {
                Box::new(move |x| bump(dist(x, &center).powi(2) / (radius * radius)))
            }
            FunctionSpec::Step { normal, offset } => Box::new(move |x| {
                if normal.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() >= offset {
                    1.0
                } else {
                    0.0
                }
            }),
            FunctionSpec::Distance => {
                let d = domain.clone();
                Box::new(move |x| if d.contains(x) { d.distance_to_boundary(x).unwrap_or(0.0) } else { 0.0 })
            }
            FunctionSpec::LogProfile { center } => Box::new(move |x| {
                let r = dist(x, &center);
                if r == 0.0 {
                    0.0
                } else {
                    1.0 / (std::f64::consts::E / r).ln()
                }
            }),
            FunctionSpec::RandomSmooth { seed, modes } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let dim = domain.dim();
                let terms: Vec<(f64, f64, Vec<f64>)> = (0..modes)
                    .map(|_| {
                        let a = rng.gen_range(-1.0..1.0);
                        let ph = rng.gen_range(0.0..std::f64::consts::TAU);
                        let w = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                        (a, ph, w)
                    })
                    .collect();
                Box::new(move |x| {
                    terms
                        .iter()
                        .map(|(a, ph, w)| {
                            let arg: f64 = w.iter().zip(x).map(|(wk, v)| wk * v).sum();
                            a * (std::f64::consts::TAU * arg + ph).sin()
                        })
                        .sum()
                })
            }
            FunctionSpec::Corpus { name, window } => {
                let base = CorpusFn::from_name(&name).expect("validated");
                match window {
                    None => Box::new(move |x| base.eval(x)),
                    Some(margin) => {
                        let w = Windowed { base, margin };
                        Box::new(move |x| w.eval(x))
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_evaluate() {
        let d = DomainShape::unit_square(0.5);
        let f = FunctionSpec::Affine { slope: vec![2.0, -1.0], offset: 0.5 }.evaluator(&d);
        assert_eq!(f(&[1.0, 1.0]), 1.5);
        let f = FunctionSpec::Polynomial { coefficients: vec![1.0, 0.0, 2.0] }.evaluator(&d);
        assert_eq!(f(&[1.0, 2.0]), 3.0 + 9.0);
        let f = FunctionSpec::Bump { center: vec![0.5, 0.5], radius: 0.25 }.evaluator(&d);
        assert_eq!((f(&[0.5, 0.5]), f(&[0.5, 0.8])), (1.0, 0.0));
        let f = FunctionSpec::Step { normal: vec![1.0, 0.0], offset: 0.5 }.evaluator(&d);
        assert_eq!((f(&[0.4, 0.0]), f(&[0.5, 0.0])), (0.0, 1.0));
        let f = FunctionSpec::Distance.evaluator(&d);
        assert!((f(&[0.25, 0.5]) - 0.25).abs() < 1e-15 && f(&[1.5, 0.5]) == 0.0);
        let f = FunctionSpec::LogProfile { center: vec![0.0, 0.0] }.evaluator(&d);
        assert!((f(&[1.0, 0.0]) - 1.0).abs() < 1e-15);
        let a = FunctionSpec::RandomSmooth { seed: 3, modes: 4 }.evaluator(&d);
        let b = FunctionSpec::RandomSmooth { seed: 3, modes: 4 }.evaluator(&d);
        assert_eq!(a(&[0.3, 0.7]), b(&[0.3, 0.7]));
    }

    #[test]
    fn windowed_set_matches_corpus() {
        let d = DomainShape::unit_square(0.5);
        let fs = FunctionSpec::windowed();
        assert_eq!(fs.len(), 20);
        for f in &fs {
            f.validate(2).unwrap();
            assert_eq!(f.evaluator(&d)(&[0.02, 0.5]), 0.0);
        }
    }

    #[test]
    fn json_form() {
        let f: FunctionSpec = serde_json::from_str(r#"{"generator": "bump", "center": [0.5], "radius": 0.2}"#).unwrap();
        assert_eq!(f, FunctionSpec::Bump { center: vec![0.5], radius: 0.2 });
        assert!(f.validate(2).is_err());
        assert!(FunctionSpec::Corpus { name: "nope".into(), window: None }.validate(2).is_err());
    }
}
