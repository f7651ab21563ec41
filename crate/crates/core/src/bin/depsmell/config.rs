use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use crate::args::Format;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub registry: Option<String>,
    #[serde(default)]
    pub lint: LintConfig,
    #[serde(default)]
    pub labels: LabelsConfig,
    #[serde(default)]
    pub forest: ForestConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub explain: ExplainConfig,
    #[serde(default)]
    pub features: FeaturesConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LintConfig {
    pub include_dev: Option<bool>,
    pub check_lockfile: Option<bool>,
    pub check_imports: Option<bool>,
    pub extensions: Option<Vec<String>>,
    pub fail_on: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelsConfig {
    pub fast_below_days: Option<f64>,
    pub slow_above_days: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub max_features: Option<toml::Value>,
    pub max_depth: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub test_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainConfig {
    pub repeats: Option<usize>,
    pub ice_sample: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesConfig {
    pub correlation_threshold: Option<f64>,
}

pub fn load(path: Option<&Path>) -> anyhow::Result<Config> {
    let Some(path) = path else { return Ok(Config::default()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}
