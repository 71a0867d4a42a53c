use std::path::{Path, PathBuf};

use serde::Deserialize;
use sequil_core::{Error, Result};

/// Defaults read from `--config`. Every field is optional and any flag given
/// on the command line wins.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub threads: Option<usize>,
    pub games: Option<PathBuf>,
    pub grid: Option<usize>,
    pub lambda_max: Option<f64>,
    pub tau_max: Option<f64>,
    pub s_steps: Option<usize>,
    pub mps_steps: Option<usize>,
    pub hit_unit: Option<String>,
    pub resamples: Option<usize>,
    pub seed: Option<u64>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            context: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
