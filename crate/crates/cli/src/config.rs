//! Experiment configuration: a JSON file whose fields individual CLI flags
//! override.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::Deserialize;

/// `gs_lambda` accepts a scalar or a sweep list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrList {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            Self::Scalar(x) => vec![x],
            Self::List(xs) => xs,
        }
    }
}

/// On-disk experiment configuration. Every field is optional; flags win
/// over file values, and built-in defaults fill the rest.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub logits: Option<Vec<f64>>,
    pub temperature: Option<f64>,
    pub noise_scale: Option<f64>,
    pub gs_lambda: Option<ScalarOrList>,
    pub n_draws: Option<usize>,
    pub output_path: Option<PathBuf>,
    // Subcommand-specific options.
    pub k: Option<usize>,
    pub betas: Option<Vec<f64>>,
    pub estimator: Option<String>,
    pub payoff: Option<Vec<f64>>,
    pub payoff_form: Option<String>,
    pub n_samples: Option<usize>,
    pub condition_index: Option<usize>,
    pub condition_max: Option<f64>,
    pub partition: Option<String>,
    pub hard: Option<bool>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))
    }
}

/// A config/flag validation failure that names the offending field.
pub fn field_error(field: &str, why: &str) -> anyhow::Error {
    anyhow!("field '{field}': {why}")
}

pub fn require_positive(field: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(field_error(field, "must be positive and finite"))
    }
}

pub fn require_at_least_one(field: &str, value: usize) -> Result<usize> {
    if value >= 1 {
        Ok(value)
    } else {
        Err(field_error(field, "must be at least 1"))
    }
}

pub fn validated_logits(field: &str, logits: Vec<f64>) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(field_error(field, "must be nonempty"));
    }
    if logits.iter().any(|a| a.is_nan() || *a == f64::INFINITY) {
        return Err(field_error(field, "entries must be finite or -inf"));
    }
    if !logits.iter().any(|a| a.is_finite()) {
        return Err(field_error(field, "needs at least one finite entry"));
    }
    Ok(logits)
}
