use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hardy_sobolev::geometry::DomainShape;

use crate::functions::FunctionSpec;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Equivalence,
    Extension,
    Hardy,
    Capacity,
    Content,
    Decompose,
    Counterexample,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Equivalence => "equivalence",
            Experiment::Extension => "extension",
            Experiment::Hardy => "hardy",
            Experiment::Capacity => "capacity",
            Experiment::Content => "content",
            Experiment::Decompose => "decompose",
            Experiment::Counterexample => "counterexample",
        }
    }
}

/// A named preset (windows padded by 2, room for the `10 ε₀` collar) or an
/// inline domain in its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Named(String),
    Inline(DomainShape),
}

impl DomainSpec {
    pub fn resolve(&self) -> Result<DomainShape, CliError> {
        match self {
            DomainSpec::Inline(d) => Ok(d.clone()),
            DomainSpec::Named(n) => match n.as_str() {
                "unit_square" => Ok(DomainShape::unit_square(2.0)),
                "unit_interval" => Ok(DomainShape::rectangle(vec![0.0], vec![1.0], 2.0)),
                "hexagon" => DomainShape::regular_polygon([0.5, 0.5], 0.5, 6, 2.0).map_err(CliError::from),
                other => Err(CliError::Config(format!("unknown domain preset '{other}'"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtensionSettings {
    pub eps0: f64,
    /// Preferred reflected-ball radius factor.
    pub c: f64,
}

impl Default for ExtensionSettings {
    fn default() -> Self {
        ExtensionSettings { eps0: 1.0 / 6.0, c: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardySettings {
    /// Cloud is `[−pad, 1 + pad]^n` around the unit cube.
    pub pad: f64,
    /// Fatness probe: boundary samples, radii and nodes per radius.
    pub fatness_samples: Vec<Vec<f64>>,
    pub fatness_radii: Vec<f64>,
    pub points_per_radius: usize,
    pub q: f64,
    /// Grid floors `h_min` of the divergence curve.
    pub h_min: Vec<f64>,
}

impl Default for HardySettings {
    fn default() -> Self {
        HardySettings {
            pad: 0.25,
            fatness_samples: vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.5]],
            fatness_radii: vec![0.05, 0.1, 0.2],
            points_per_radius: 4,
            q: 5.0 / 6.0,
            h_min: vec![(-4f64).exp(), (-8f64).exp(), (-16f64).exp(), (-32f64).exp()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityCase {
    pub center: Vec<f64>,
    /// `E` is the closed ball of this radius, `U` the open one.
    pub e_radius: f64,
    pub u_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacitySettings {
    pub cases: Vec<CapacityCase>,
    pub dilations: Vec<f64>,
    /// Pair range in grid steps.
    pub reach: f64,
}

impl Default for CapacitySettings {
    fn default() -> Self {
        CapacitySettings {
            cases: vec![CapacityCase { center: vec![0.5, 0.5], e_radius: 0.15, u_radius: 0.35 }],
            dilations: vec![2.0],
            reach: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSet {
    Segment { a: Vec<f64>, b: Vec<f64> },
    SquareBoundary { lo: [f64; 2], side: f64 },
    Cantor { dim: usize, levels: usize, keep: usize },
    Csv { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContentSettings {
    pub sets: Vec<TargetSet>,
    pub exponents: Vec<f64>,
}

impl Default for ContentSettings {
    fn default() -> Self {
        ContentSettings {
            sets: vec![
                TargetSet::Segment { a: vec![0.0, 0.3], b: vec![1.0, 0.3] },
                TargetSet::SquareBoundary { lo: [0.0, 0.0], side: 1.0 },
                TargetSet::Cantor { dim: 2, levels: 4, keep: 4 },
            ],
            exponents: vec![0.5, 1.0, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub domain: DomainSpec,
    pub dim: usize,
    pub corpus: Vec<FunctionSpec>,
    pub p: f64,
    /// Cells per unit length; strictly increasing.
    pub resolutions: Vec<usize>,
    /// Radii per octave for the ladders built here (smooth proxy scales,
    /// content covers).
    pub ladder_density: u32,
    pub lp_tolerance: f64,
    pub seed: u64,
    pub extension: ExtensionSettings,
    pub hardy: HardySettings,
    pub capacity: CapacitySettings,
    pub content: ContentSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "default".into(),
            domain: DomainSpec::Named("unit_square".into()),
            dim: 2,
            corpus: FunctionSpec::standard(),
            p: 1.0,
            resolutions: vec![8, 16],
            ladder_density: 1,
            lp_tolerance: 1e-9,
            seed: 0,
            extension: ExtensionSettings::default(),
            hardy: HardySettings::default(),
            capacity: CapacitySettings::default(),
            content: ContentSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.resolutions.is_empty() || self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("resolutions must be nonempty and strictly increasing, got {:?}", self.resolutions));
        }
        if self.resolutions[0] < 2 {
            return bad("resolutions start at 2".into());
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad(format!("p must lie in (0, 1], got {}", self.p));
        }
        if !(1..=3).contains(&self.dim) {
            return bad(format!("dim must be 1, 2 or 3, got {}", self.dim));
        }
        if self.ladder_density == 0 {
            return bad("ladder_density must be positive".into());
        }
        if !(self.lp_tolerance > 0.0) {
            return bad("lp_tolerance must be positive".into());
        }
        let domain = self.domain.resolve()?;
        if domain.dim() != self.dim {
            return bad(format!("domain has dimension {}, config says {}", domain.dim(), self.dim));
        }
        for f in &self.corpus {
            f.validate(self.dim)?;
        }
        Ok(())
    }

    /// SHA-256 of the serialized config, hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("configs serialize");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_hash_is_stable() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.hash(), ExperimentConfig::default().hash());
        assert_eq!(c.hash().len(), 64);
        let d = ExperimentConfig { seed: 1, ..c.clone() };
        assert_ne!(c.hash(), d.hash());
    }

    #[test]
    fn json_round_trip_and_partial_configs() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let partial = ExperimentConfig::from_json(r#"{"name": "x", "resolutions": [4, 8]}"#).unwrap();
        assert_eq!(partial.resolutions, vec![4, 8]);
        assert_eq!(partial.dim, 2);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"resolutions": [8, 8]}"#,
            r#"{"resolutions": []}"#,
            r#"{"p": 1.5}"#,
            r#"{"domain": "moon"}"#,
            r#"{"dim": 1}"#,
            r#"{"unknown_field": 1}"#,
            r#"{"corpus": [{"generator": "nope"}]}"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn inline_domain() {
        let d = DomainShape::unit_square(0.5);
        let text = format!(r#"{{"domain": {}}}"#, d.to_json());
        let c = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(c.domain.resolve().unwrap(), d);
    }
}
