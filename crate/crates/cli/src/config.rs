//! Strict TOML run configuration. Unknown keys are rejected; the only
//! defaulted fields are `steps_per_delay = 64`, `record_stride = 1` and
//! `eps_consensus = 1e-8`.

use serde::{Deserialize, Serialize};

use hkdelay::model::InfluenceFamily;
use hkdelay::{InfluenceFunction, InitialHistory, IntegratorConfig, ModelParams, WeightScheme};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Generator seed; mandatory for randomized histories.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub model: ModelSection,
    pub integrator: IntegratorSection,
    pub history: HistorySection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meanfield: Option<MeanFieldSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n_agents: usize,
    pub dim: usize,
    pub tau: f64,
    pub scheme: WeightScheme,
    pub influence: InfluenceSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "family")]
pub enum InfluenceSection {
    PowerLaw { beta: f64 },
    Constant { level: f64 },
    Tabulated { knots: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub t_end: f64,
    #[serde(default = "default_steps_per_delay")]
    pub steps_per_delay: usize,
    #[serde(default = "default_record_stride")]
    pub record_stride: usize,
}

fn default_steps_per_delay() -> usize {
    64
}

fn default_record_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum HistorySection {
    /// Constant-in-time positions, one row of coordinates per agent.
    ConstantPerAgent { positions: Vec<Vec<f64>> },
    /// Dense frames at grid resolution: `steps_per_delay + 1` frames, each
    /// `n_agents x dim`.
    Sampled { frames: Vec<Vec<Vec<f64>>> },
    /// Constant-in-time positions drawn uniformly from a box (one `[lo, hi]`
    /// pair per dimension) with the top-level seed.
    RandomConstant {
        #[serde(rename = "box")]
        bounds: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default)]
    pub directions: Directions,
    #[serde(default = "default_eps_consensus")]
    pub eps_consensus: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            directions: Directions::default(),
            eps_consensus: default_eps_consensus(),
        }
    }
}

fn default_eps_consensus() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Directions {
    /// The string `"basis"`: one projection per coordinate axis.
    Named(BasisName),
    /// Explicit unit vectors.
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisName {
    Basis,
}

impl Default for Directions {
    fn default() -> Self {
        Directions::Named(BasisName::Basis)
    }
}

impl Directions {
    pub fn resolve(&self, dim: usize) -> Vec<Vec<f64>> {
        match self {
            Directions::Named(BasisName::Basis) => (0..dim)
                .map(|c| {
                    let mut v = vec![0.0; dim];
                    v[c] = 1.0;
                    v
                })
                .collect(),
            Directions::Explicit(dirs) => dirs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub tau: Vec<f64>,
    pub beta: Vec<f64>,
    pub n_agents: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanFieldSourceKind {
    UniformBox,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldSection {
    pub source: MeanFieldSourceKind,
    /// Per-dimension `[lo, hi]`; required for `uniform-box`.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Required for `gaussian`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncate: Option<Vec<(f64, f64)>>,
    pub n_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub horizon: f64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        // Field-level numeric validation lives in the core constructors;
        // here we check cross-field constraints that only the config knows.
        if matches!(self.history, HistorySection::RandomConstant { .. }) && self.seed.is_none() {
            return Err(CliError::Config(
                "config error: field `seed` is required for history kind `random-constant`"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn influence(&self) -> Result<InfluenceFunction, CliError> {
        let family = match &self.model.influence {
            InfluenceSection::PowerLaw { beta } => InfluenceFamily::PowerLaw { beta: *beta },
            InfluenceSection::Constant { level } => InfluenceFamily::Constant { level: *level },
            InfluenceSection::Tabulated { knots } => InfluenceFamily::Tabulated {
                knots: knots.clone(),
            },
        };
        InfluenceFunction::new(family)
            .map_err(|e| CliError::Config(format!("config error in [model.influence]: {e}")))
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let params = ModelParams {
            n_agents: self.model.n_agents,
            dim: self.model.dim,
            tau: self.model.tau,
            influence: self.influence()?,
            scheme: self.model.scheme,
        };
        params
            .validate()
            .map_err(|e| CliError::Config(format!("config error in [model]: {e}")))?;
        Ok(params)
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            steps_per_delay: self.integrator.steps_per_delay,
            t_end: self.integrator.t_end,
            record_stride: self.integrator.record_stride,
            eps_consensus: self.analysis.eps_consensus,
        }
    }

    pub fn history(&self) -> Result<InitialHistory, CliError> {
        let build = || -> hkdelay::Result<InitialHistory> {
            Ok(match &self.history {
                HistorySection::ConstantPerAgent { positions } => InitialHistory::ConstantPerAgent(
                    hkdelay::Points::from_rows(positions)?,
                ),
                HistorySection::Sampled { frames } => {
                    let mut pts = Vec::with_capacity(frames.len());
                    for frame in frames {
                        pts.push(hkdelay::Points::from_rows(frame)?);
                    }
                    InitialHistory::Sampled(pts)
                }
                HistorySection::RandomConstant { bounds } => InitialHistory::RandomConstant {
                    seed: self.seed.expect("validated"),
                    bounds: bounds.clone(),
                },
            })
        };
        build().map_err(|e| CliError::Config(format!("config error in [history]: {e}")))
    }

    pub fn directions(&self) -> Vec<Vec<f64>> {
        self.analysis.directions.resolve(self.model.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const EXAMPLE: &str = r#"
seed = 42

[model]
n_agents = 20
dim = 1
tau = 1.0
scheme = "classical"

[model.influence]
family = "power-law"
beta = 1.0

[integrator]
t_end = 100.0

[history]
kind = "random-constant"
box = [[0.0, 10.0]]
"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg = RunConfig::parse(EXAMPLE).unwrap();
        assert_eq!(cfg.integrator.steps_per_delay, 64);
        assert_eq!(cfg.integrator.record_stride, 1);
        assert_eq!(cfg.analysis.eps_consensus, 1e-8);
        assert_eq!(cfg.directions(), vec![vec![1.0]]);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = EXAMPLE.replace("seed = 42", "seed = 42\nbogus = 1");
        let err = RunConfig::parse(&bad).unwrap_err();
        assert!(format!("{err}").contains("bogus"));
    }

    #[test]
    fn requires_seed_for_random_history() {
        let bad = EXAMPLE.replace("seed = 42\n", "");
        let err = RunConfig::parse(&bad).unwrap_err();
        assert!(format!("{err}").contains("seed"));
    }

    #[test]
    fn names_field_for_bad_tau() {
        let bad = EXAMPLE.replace("tau = 1.0", "tau = -1.0");
        let cfg = RunConfig::parse(&bad).unwrap();
        let err = cfg.model_params().unwrap_err();
        assert!(format!("{err}").contains("tau"));
    }

    #[test]
    fn round_trips_through_serialization() {
        let cfg = RunConfig::parse(EXAMPLE).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let cfg2 = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn explicit_directions_parse() {
        let cfg_text = EXAMPLE.to_string()
            + r#"
[analysis]
directions = [[1.0]]
eps_consensus = 1e-6
"#;
        let cfg = RunConfig::parse(&cfg_text).unwrap();
        assert_eq!(cfg.analysis.eps_consensus, 1e-6);
        assert_eq!(cfg.directions(), vec![vec![1.0]]);
    }
}
