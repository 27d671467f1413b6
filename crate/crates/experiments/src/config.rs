use std::path::{Path, PathBuf};

use covest::VectorModel;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{ExperimentError, Result};

/// Parameter grid; each experiment reads the axes it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub n: Vec<usize>,
    #[serde(rename = "N")]
    pub big_n: Vec<usize>,
    /// Sample sizes given as multiples `N/n`.
    pub ratio: Vec<usize>,
    pub beta: Vec<f64>,
    /// Frame sizes.
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    /// Subset sizes or sequence lengths.
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registry name; optional in files, filled from the subcommand.
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub model: Option<VectorModel>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub params: Map<String, Value>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: Some(experiment.to_string()),
            model: None,
            grid: Grid::default(),
            trials: 1,
            master_seed: 0,
            output_path: None,
            params: Map::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ExperimentError::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn with_model(mut self, model: VectorModel) -> Self {
        self.model = Some(model);
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn validate_common(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(ExperimentError::config("trials must be at least 1"));
        }
        if let Some(m) = &self.model {
            m.validate().map_err(|e| ExperimentError::config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn model(&self) -> Result<&VectorModel> {
        self.model
            .as_ref()
            .ok_or_else(|| ExperimentError::config("this experiment needs a model"))
    }

    /// Model template with the dimension replaced by `n`.
    pub fn model_in_dim(&self, n: usize) -> Result<VectorModel> {
        let mut m = self.model()?.clone();
        m.n = n;
        Ok(m)
    }

    pub fn param_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| ExperimentError::config(format!("param {key} must be a number"))),
        }
    }

    pub fn param_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|v| v as usize)
                .ok_or_else(|| ExperimentError::config(format!("param {key} must be a non-negative integer"))),
        }
    }

    pub fn param_opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.params.get(key).map(|_| self.param_f64(key, 0.0)).transpose()
    }
}

pub(crate) fn require_nonempty<T>(axis: &[T], name: &str) -> Result<()> {
    if axis.is_empty() {
        Err(ExperimentError::config(format!("grid.{name} must be non-empty")))
    } else {
        Ok(())
    }
}
