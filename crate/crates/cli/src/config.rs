//! Experiment configuration file: a single JSON document naming the model,
//! losses, rules, Monte Carlo settings, sweep regime, and output location.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use abos::asymptotics::RegimeSpec;
use abos::risk::McRule;
use abos::{validate_params, LossParams, ModelParams, Probability};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: Option<ModelParams>,
    #[serde(default)]
    pub losses: Option<LossParams>,
    #[serde(default)]
    pub rules: Vec<RuleSpec>,
    #[serde(default)]
    pub mc: Option<McSection>,
    #[serde(default)]
    pub regime: Option<RegimeSpec>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub rule: McRule,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n_replicates: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    /// Accepted for forward compatibility; each command has one fixed
    /// output format today.
    #[serde(default)]
    #[allow(dead_code)]
    pub formats: Option<Vec<String>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("cannot parse config {}: {e}", path.display())))
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        self.model
            .ok_or_else(|| CliError::config("config is missing the `model` section".into()))
    }

    pub fn losses(&self) -> Result<LossParams, CliError> {
        self.losses
            .ok_or_else(|| CliError::config("config is missing the `losses` section".into()))
    }

    pub fn mc(&self) -> Result<McSection, CliError> {
        self.mc
            .ok_or_else(|| CliError::config("config is missing the `mc` section".into()))
    }

    pub fn regime(&self) -> Result<&RegimeSpec, CliError> {
        self.regime
            .as_ref()
            .ok_or_else(|| CliError::config("config is missing the `regime` section".into()))
    }

    pub fn validated_model(&self) -> Result<(ModelParams, LossParams), CliError> {
        let model = self.model()?;
        let losses = self.losses()?;
        let report = validate_params(&model, &losses);
        if !report.is_ok() {
            return Err(CliError::config(format!(
                "invalid parameters: {}",
                report.violations.join("; ")
            )));
        }
        Ok((model, losses))
    }

    pub fn rules(&self) -> Result<Vec<(McRule, Option<Probability>)>, CliError> {
        if self.rules.is_empty() {
            return Err(CliError::config("config lists no rules".into()));
        }
        self.rules
            .iter()
            .map(|spec| {
                let alpha = match spec.alpha {
                    None => None,
                    Some(a) => Some(
                        Probability::new(a)
                            .map_err(|e| CliError::config(format!("rule {}: {e}", spec.rule)))?,
                    ),
                };
                if spec.rule.needs_alpha() && alpha.is_none() {
                    return Err(CliError::config(format!(
                        "rule {} requires alpha in the config",
                        spec.rule
                    )));
                }
                Ok((spec.rule, alpha))
            })
            .collect()
    }
}
