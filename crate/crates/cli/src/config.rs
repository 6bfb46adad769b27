//! TOML run configuration.
//!
//! Every numerical choice has a default here and nowhere else; `ou-lab
//! defaults` prints the resolved table.

use std::path::Path;

use ou_lab_core::experiments::{ExperimentConfig, Preset};
use ou_lab_core::verifier::suite::SuiteConfig;
use ou_lab_core::verifier::Tolerances;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable overriding the tensor-grid node budget.
pub const NODE_BUDGET_ENV: &str = "OU_LAB_NODE_BUDGET";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Overrides the suite seed; recorded in every output.
    pub seed: Option<u64>,
    /// Output directory when `--out` is not given.
    pub output_dir: Option<String>,
    pub verify: VerifyConfig,
    pub evolve: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: SuiteConfig,
    pub tolerances: Tolerances,
    /// Densities on which the contraction and entropy bounds are checked.
    pub presets: Vec<Preset>,
    /// Exponents `p` of the contraction check.
    pub lp_exponents: Vec<f64>,
    /// Times of the contraction check.
    pub contraction_times: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suite: SuiteConfig::default(),
            tolerances: Tolerances::default(),
            presets: default_presets(),
            lp_exponents: vec![2.0, 4.0],
            contraction_times: vec![0.1, 0.5, 1.0, 3.0],
        }
    }
}

pub fn default_presets() -> Vec<Preset> {
    vec![
        Preset::Uniform,
        Preset::FirstChaos { epsilon: 0.01 },
        Preset::SecondChaos { epsilon: 0.01 },
        Preset::Mixed { c0: 1.5, c1: 0.2, c2: 0.1 },
    ]
}

impl Config {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is representable in TOML")
    }
}

/// Node budget from the environment, or the library default.
pub fn node_budget_from_env() -> Result<u64, CliError> {
    match std::env::var(NODE_BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|b| *b > 0)
            .ok_or_else(|| CliError::Config(format!("{NODE_BUDGET_ENV}={v:?} is not a positive integer"))),
        Err(std::env::VarError::NotPresent) => Ok(ou_lab_core::hermite::DEFAULT_NODE_BUDGET),
        Err(e) => Err(CliError::Config(format!("{NODE_BUDGET_ENV}: {e}"))),
    }
}
