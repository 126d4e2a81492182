//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use sbg_core::{EstimatorSettings, LevyModel, ModelSpec, Payoff, PayoffKind};

pub const SCHEMA: &str = "sbg-experiment/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Mc,
    Mlmc,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub mode: Option<Mode>,
    pub eps: Option<f64>,
    /// Fixed cutoff for plain Monte Carlo instead of bias inversion.
    pub kappa: Option<f64>,
    /// Fixed sample count for plain Monte Carlo instead of the pilot rule.
    pub samples: Option<usize>,
    pub sticks: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub r: f64,
    pub levels: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedupSection {
    #[serde(default)]
    pub kappas: Vec<f64>,
    /// Expected jump counts `ν(ℝ∖{0})T` for finite-activity models.
    #[serde(default)]
    pub intensities: Vec<f64>,
    pub sticks: Vec<usize>,
    pub samples: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

fn default_repeats() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub kappa: f64,
    pub samples: usize,
    pub sticks: usize,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection { kappa: 0.05, samples: 100_000, sticks: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub model: ModelSpec,
    pub payoff: PayoffKind,
    #[serde(default = "one")]
    pub s0: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub estimator: EstimatorSettings,
    #[serde(default)]
    pub estimate: EstimateSection,
    #[serde(default)]
    pub scan: Option<ScanSection>,
    #[serde(default)]
    pub speedup: Option<SpeedupSection>,
    #[serde(default)]
    pub validate: ValidateSection,
}

fn one() -> f64 {
    1.0
}

/// Validated configuration with the model built.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: LevyModel,
    pub payoff: Payoff,
}

pub fn load(path: &Path) -> Result<Experiment, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Experiment, String> {
    let raw: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    match raw.get("schema").and_then(Value::as_str) {
        Some(SCHEMA) => {}
        Some(other) => return Err(format!("unsupported schema \"{other}\", expected \"{SCHEMA}\"")),
        None => return Err(format!("missing field `schema` (expected \"{SCHEMA}\")")),
    }
    let config: ExperimentConfig = serde_json::from_value(raw.clone()).map_err(|e| e.to_string())?;
    let typed = serde_json::to_value(&config).map_err(|e| e.to_string())?;
    if let Some(key) = unknown_key(&raw, &typed, "") {
        return Err(format!("unknown field `{key}`"));
    }
    if !(config.s0 > 0.0 && config.s0.is_finite()) {
        return Err("`s0` must be positive".into());
    }
    if !(config.horizon > 0.0 && config.horizon.is_finite()) {
        return Err("`horizon` must be positive".into());
    }
    let model = LevyModel::try_from(config.model.clone()).map_err(|e| format!("`model`: {e}"))?;
    let payoff = Payoff::new(config.payoff, config.s0);
    Ok(Experiment { config, model, payoff })
}

/// First key present in `raw` but absent from the re-serialized typed config.
fn unknown_key(raw: &Value, typed: &Value, prefix: &str) -> Option<String> {
    match (raw, typed) {
        (Value::Object(r), Value::Object(t)) => r.iter().find_map(|(k, v)| {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match t.get(k) {
                None => Some(path),
                Some(tv) => unknown_key(v, tv, &path),
            }
        }),
        (Value::Array(r), Value::Array(t)) => {
            r.iter().zip(t).enumerate().find_map(|(i, (a, b))| unknown_key(a, b, &format!("{prefix}[{i}]")))
        }
        _ => None,
    }
}
