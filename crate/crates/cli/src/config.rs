use std::path::Path;

use discord_core::OptimizerConfig;
use serde::Deserialize;

use crate::CliError;

/// Run-configuration file. Every key is optional; command-line flags win.
///
/// ```toml
/// seed = 7
/// restarts = 40
/// max_iterations = 4000
/// tolerance = 1e-12
/// oracle_check = true
/// ```
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
    pub step: Option<f64>,
    pub inner_iterations: Option<usize>,
    pub oracle_check: Option<bool>,
    /// Suite tolerance for `verify`.
    pub suite_tolerance: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn optimizer(&self, seed: u64) -> OptimizerConfig {
        let mut config = OptimizerConfig::with_seed(seed);
        if let Some(r) = self.restarts {
            config.restarts = r;
        }
        if let Some(m) = self.max_iterations {
            config.max_iterations = m;
        }
        if let Some(t) = self.tolerance {
            config.tolerance = t;
        }
        if let Some(s) = self.step {
            config.step = s;
        }
        if let Some(i) = self.inner_iterations {
            config.inner_iterations = i;
        }
        if let Some(o) = self.oracle_check {
            config.oracle_check = o;
        }
        config
    }
}
