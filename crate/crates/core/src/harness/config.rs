//! Experiment configuration: TOML sections with explicit defaults.
//!
//! `ExperimentConfig::resolve` materializes every default so the echoed
//! config written next to the artifacts is complete and round-trips
//! losslessly. Every key can be overridden through the environment with
//! `IMCMC_<SECTION>_<KEY>` (TOML-syntax values).

use crate::diagnostics::DiagnosticsOptions;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "IMCMC_";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub target: TargetSection,
    pub sampler: SamplerSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub iterations: usize,
    /// Default: 10% of iterations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads; 0 means available parallelism.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    /// std-normal | log-normal | bimodal | moon | gaussian-mixture |
    /// multimodal-preset | logistic-regression
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standardize: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    /// mh | ijump | sde | mala | imala | hmc
    pub name: String,
    /// mh: gaussian | symmetrized-gamma; ijump: half-space-gaussian |
    /// gamma-directional
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proposal: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leapfrog_steps: Option<usize>,
    /// 0 disables periodic auxiliary resampling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resample_period: Option<usize>,
    /// none | rotation | block — the skew part of the SDE dynamics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ess_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mbm_batches: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mbm_standard_variant: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_bins_per_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_box: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape_by_sign_z1: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acf_lags: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    /// Fills in every default so the config is fully explicit. Idempotent.
    pub fn resolve(mut self) -> Self {
        let iters = self.experiment.iterations;
        self.experiment.burn_in.get_or_insert(iters / 10);
        self.experiment.chains.get_or_insert(1);
        self.experiment.seed.get_or_insert(0);
        self.experiment.threads.get_or_insert(0);
        if self.output.directory.is_none() {
            self.output.directory = Some(format!("runs/{}", self.experiment.name));
        }
        let d = &mut self.diagnostics;
        d.ess_window.get_or_insert(0); // 0 = min(3000, N/10)
        d.mbm_batches.get_or_insert(0); // 0 = floor(sqrt N)
        d.mbm_standard_variant.get_or_insert(false);
        d.tv_bins_per_dim.get_or_insert(100);
        d.escape_by_sign_z1
            .get_or_insert(self.target.name == "bimodal");
        d.acf_lags.get_or_insert(50);
        if self.sampler.name == "ijump" {
            self.sampler.resample_period.get_or_insert(100);
        } else {
            self.sampler.resample_period.get_or_insert(0);
        }
        self
    }

    pub fn diagnostics_options(&self) -> DiagnosticsOptions {
        let d = &self.diagnostics;
        DiagnosticsOptions {
            ess_window: d.ess_window.filter(|&w| w > 0),
            mbm_batches: d.mbm_batches.filter(|&k| k > 0),
            mbm_standard_variant: d.mbm_standard_variant.unwrap_or(false),
            tv_box: d.tv_box.as_ref().map(|rows| {
                rows.iter()
                    .map(|r| (r.first().copied().unwrap_or(0.0), r.get(1).copied().unwrap_or(0.0)))
                    .collect()
            }),
            tv_bins_per_dim: d.tv_bins_per_dim.unwrap_or(100),
            acf_lags: d.acf_lags.unwrap_or(50),
            escape_by_sign_z1: d.escape_by_sign_z1.unwrap_or(false),
        }
    }

    /// Seed for chain `index`, derived as `seed XOR index`.
    pub fn chain_seed(&self, index: usize) -> u64 {
        self.experiment.seed.unwrap_or(0) ^ index as u64
    }
}

/// Applies `IMCMC_<SECTION>_<KEY>` environment overrides to a raw TOML text.
/// The pairs are passed in explicitly so the logic stays testable.
pub fn apply_env_overrides(
    text: &str,
    env: impl Iterator<Item = (String, String)>,
) -> Result<String> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("bad config: {e}")))?;
    for (key, value) in env {
        let Some(rest) = key.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let Some((section, field)) = rest.split_once('_') else {
            continue;
        };
        let section = section.to_ascii_lowercase();
        let field = field.to_ascii_lowercase();
        let known = [
            "experiment",
            "target",
            "sampler",
            "output",
            "diagnostics",
        ];
        if !known.contains(&section.as_str()) {
            return Err(Error::Config(format!(
                "environment override {key}: unknown section '{section}'"
            )));
        }
        let parsed = parse_toml_scalar(&value);
        table
            .entry(section)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("section for {key} is not a table")))?
            .insert(field, parsed);
    }
    Ok(toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?)
}

fn parse_toml_scalar(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    if let Ok(table) = doc.parse::<toml::Table>() {
        if let Some(v) = table.get("v") {
            return v.clone();
        }
    }
    toml::Value::String(raw.to_string())
}
