use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::AugmentConfig;
use crate::metrics::SemScoreWeights;
use crate::nbest::{DEFAULT_K_SELECT, DEFAULT_N_BEST};
use crate::remote::RetryPolicy;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Table,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            other => Err(ConfigError::Invalid(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Passthrough,
    Oracle,
    Remote,
}

impl std::str::FromStr for BackendKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "passthrough" => Ok(BackendKind::Passthrough),
            "oracle" => Ok(BackendKind::Oracle),
            "remote" => Ok(BackendKind::Remote),
            other => Err(ConfigError::Invalid(format!("unknown GER backend {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsrSourceKind {
    /// Read the manifest row's `nbest_path`.
    #[default]
    Precomputed,
    /// Send the row's `audio_path` to a transcription service.
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub n_best: usize,
    pub k_select: usize,
    pub seed: u64,
    pub concurrency: usize,
    pub report_format: ReportFormat,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection {
            n_best: DEFAULT_N_BEST,
            k_select: DEFAULT_K_SELECT,
            seed: 0,
            concurrency: 4,
            report_format: ReportFormat::Table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsrSection {
    pub source: AsrSourceKind,
    pub endpoint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GerSection {
    pub backend: BackendKind,
    pub endpoint: Option<String>,
    pub max_new_tokens: u32,
    pub temperature: f64,
}

impl Default for GerSection {
    fn default() -> Self {
        GerSection {
            backend: BackendKind::Passthrough,
            endpoint: None,
            max_new_tokens: 256,
            temperature: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub weights: SemScoreWeights,
    /// Scoring service for the semantic and entailment components. Without
    /// it the lexical stand-ins are used.
    pub scorer_endpoint: Option<String>,
}

/// Whole-run configuration, loadable from a sectioned TOML file:
///
/// ```toml
/// [pipeline]
/// n_best = 20
/// k_select = 5
///
/// [ger]
/// backend = "remote"
/// endpoint = "http://localhost:8080"
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub pipeline: PipelineSection,
    pub asr: AsrSection,
    pub ger: GerSection,
    pub metrics: MetricsSection,
    pub retry: RetryPolicy,
    pub augment: AugmentConfig,
}

impl PipelineConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.pipeline;
        if p.k_select < 1 || p.k_select > p.n_best {
            return Err(ConfigError::Invalid(format!(
                "k_select must satisfy 1 <= k_select <= n_best, got k_select={} n_best={}",
                p.k_select, p.n_best
            )));
        }
        if p.concurrency == 0 {
            return Err(ConfigError::Invalid("concurrency must be at least 1".into()));
        }
        self.metrics
            .weights
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.ger.backend == BackendKind::Remote && self.ger.endpoint.is_none() {
            return Err(ConfigError::Invalid("the remote GER backend needs ger.endpoint".into()));
        }
        if self.asr.source == AsrSourceKind::Remote && self.asr.endpoint.is_none() {
            return Err(ConfigError::Invalid("the remote ASR source needs asr.endpoint".into()));
        }
        if !(self.retry.timeout_s.is_finite() && self.retry.timeout_s > 0.0) {
            return Err(ConfigError::Invalid("retry.timeout_s must be positive".into()));
        }
        self.augment.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}
