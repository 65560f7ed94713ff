use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{AsrSourceKind, BackendKind, ConfigError, PipelineConfig, ReportFormat};
use super::manifest::{Manifest, ManifestEntry, ManifestRow};
use crate::ger::{
    correct_selection, CorrectionResult, GenerationParams, GerBackend, OracleBackend, PassthroughBackend, RemoteBackend,
};
use crate::metrics::{aggregate_report, dual_reference_evaluate, render_table, EvaluationRecord, MetricsError, ScorerSet};
use crate::nbest::{concat_segments, parse_nbest_file, select_diverse, NBestError, NBestList, SegmentedNBest};
use crate::remote::{JsonClient, RemoteError};
use crate::transcript::{clean_reference, parse_annotations, verbatim_reference};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Transcript,
    Fetch,
    Select,
    Correct,
    Score,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Transcript => "transcript",
            Stage::Fetch => "fetch",
            Stage::Select => "select",
            Stage::Correct => "correct",
            Stage::Score => "score",
        };
        f.write_str(s)
    }
}

/// A quarantined per-utterance failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub utterance_id: String,
    pub line: usize,
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FetchError {
    #[error("utterance {0:?} has no nbest_path")]
    MissingNBestPath(String),
    #[error("utterance {0:?} has no audio_path")]
    MissingAudioPath(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    NBest(#[from] NBestError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error("n-best document is for {found:?}, expected {expected:?}")]
    UtteranceMismatch { expected: String, found: String },
}

/// Where N-best lists come from.
#[derive(Debug, Clone)]
pub enum AsrSource {
    Precomputed,
    /// `POST /transcribe {"audio_path", "n_best"}` returning an N-best document.
    Remote(JsonClient),
}

#[derive(Serialize)]
struct TranscribeRequest<'a> {
    audio_path: &'a str,
    n_best: usize,
}

/// Loads the N-best document for `row` and trims each segment to `n_best`.
pub fn fetch_nbest(
    row: &ManifestRow,
    manifest: &Manifest,
    n_best: usize,
    source: &AsrSource,
) -> Result<SegmentedNBest, FetchError> {
    let mut doc = match source {
        AsrSource::Precomputed => {
            let rel = row
                .nbest_path
                .as_ref()
                .ok_or_else(|| FetchError::MissingNBestPath(row.utterance_id.clone()))?;
            let path = manifest.resolve(rel);
            let bytes = std::fs::read(&path).map_err(|e| FetchError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            parse_nbest_file(&bytes)?
        }
        AsrSource::Remote(client) => {
            let rel = row
                .audio_path
                .as_ref()
                .ok_or_else(|| FetchError::MissingAudioPath(row.utterance_id.clone()))?;
            let path = manifest.resolve(rel);
            let request = TranscribeRequest {
                audio_path: &path.to_string_lossy(),
                n_best,
            };
            let value: serde_json::Value = client.post("/transcribe", &request)?;
            let bytes = serde_json::to_vec(&value).expect("JSON value serializes");
            parse_nbest_file(&bytes)?
        }
    };
    if doc.utterance_id != row.utterance_id {
        return Err(FetchError::UtteranceMismatch {
            expected: row.utterance_id.clone(),
            found: doc.utterance_id,
        });
    }
    doc.truncate(n_best);
    Ok(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Clean,
    Partial,
    Failed,
}

impl RunStatus {
    /// 0 clean, 2 partial, 1 failed.
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Clean => 0,
            RunStatus::Failed => 1,
            RunStatus::Partial => 2,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOutput {
    /// In manifest order.
    pub records: Vec<EvaluationRecord>,
    pub corrections: Vec<CorrectionResult>,
    pub failures: Vec<Failure>,
}

impl PipelineOutput {
    pub fn status(&self) -> RunStatus {
        match (self.records.is_empty(), self.failures.is_empty()) {
            (_, true) if !self.records.is_empty() => RunStatus::Clean,
            (false, false) => RunStatus::Partial,
            _ => RunStatus::Failed,
        }
    }
}

/// Fully wired pipeline: N-best source, correction backend and scorers.
#[derive(Clone)]
pub struct Pipeline {
    pub config: PipelineConfig,
    pub backend: Arc<dyn GerBackend>,
    pub scorers: ScorerSet,
    pub asr: AsrSource,
}

pub fn build_backend(config: &PipelineConfig) -> Result<Arc<dyn GerBackend>, ConfigError> {
    Ok(match config.ger.backend {
        BackendKind::Passthrough => Arc::new(PassthroughBackend),
        BackendKind::Oracle => Arc::new(OracleBackend),
        BackendKind::Remote => {
            let endpoint = config
                .ger
                .endpoint
                .clone()
                .ok_or_else(|| ConfigError::Invalid("the remote GER backend needs ger.endpoint".into()))?;
            Arc::new(RemoteBackend::new(
                JsonClient::new(endpoint, config.retry),
                GenerationParams {
                    max_new_tokens: config.ger.max_new_tokens,
                    temperature: config.ger.temperature,
                },
            ))
        }
    })
}

pub fn build_scorers(config: &PipelineConfig) -> ScorerSet {
    match &config.metrics.scorer_endpoint {
        Some(endpoint) => ScorerSet::remote(JsonClient::new(endpoint.clone(), config.retry)),
        None => ScorerSet::builtin(),
    }
}

impl Pipeline {
    pub fn from_config(config: PipelineConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let backend = build_backend(&config)?;
        let scorers = build_scorers(&config);
        let asr = match (config.asr.source, &config.asr.endpoint) {
            (AsrSourceKind::Precomputed, _) => AsrSource::Precomputed,
            (AsrSourceKind::Remote, Some(endpoint)) => AsrSource::Remote(JsonClient::new(endpoint.clone(), config.retry)),
            (AsrSourceKind::Remote, None) => return Err(ConfigError::Invalid("the remote ASR source needs asr.endpoint".into())),
        };
        Ok(Pipeline {
            config,
            backend,
            scorers,
            asr,
        })
    }

    /// Runs one utterance through fetch, selection, correction and scoring.
    pub fn process(&self, entry: &ManifestEntry, manifest: &Manifest) -> Result<(EvaluationRecord, CorrectionResult), Failure> {
        let row = &entry.row;
        let fail = |stage: Stage, message: String| Failure {
            utterance_id: row.utterance_id.clone(),
            line: entry.line,
            stage,
            message,
        };

        let transcript = parse_annotations(&row.transcript_raw).map_err(|e| fail(Stage::Transcript, e.to_string()))?;
        let verbatim = verbatim_reference(&transcript);
        let clean = clean_reference(&transcript);

        let doc =
            fetch_nbest(row, manifest, self.config.pipeline.n_best, &self.asr).map_err(|e| fail(Stage::Fetch, e.to_string()))?;
        let pool = match concat_segments(&doc) {
            Ok(pool) => pool,
            // No speech detected: the recognizer's answer is the empty string.
            Err(NBestError::EmptySegments { .. }) => NBestList::from_texts(row.utterance_id.clone(), [""]),
            Err(e) => return Err(fail(Stage::Select, e.to_string())),
        };
        let selection = select_diverse(&pool, self.config.pipeline.k_select).map_err(|e| fail(Stage::Select, e.to_string()))?;

        let correction = correct_selection(self.backend.as_ref(), selection, Some(&verbatim))
            .map_err(|e| fail(Stage::Correct, e.to_string()))?;

        let score = dual_reference_evaluate(
            &correction.final_text,
            &verbatim,
            &clean,
            &self.config.metrics.weights,
            &self.scorers,
        )
        .map_err(|e| fail(Stage::Score, e.to_string()))?;

        Ok((EvaluationRecord::new(&row.utterance_id, row.category, score), correction))
    }

    /// Processes every row with bounded parallelism. Output order follows the
    /// manifest regardless of scheduling.
    pub fn run(&self, manifest: &Manifest) -> PipelineOutput {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.pipeline.concurrency.max(1))
            .build()
            .expect("thread pool");
        let results: Vec<_> = pool.install(|| manifest.entries.par_iter().map(|e| self.process(e, manifest)).collect());

        let mut out = PipelineOutput::default();
        for r in results {
            match r {
                Ok((record, correction)) => {
                    out.records.push(record);
                    out.corrections.push(correction);
                }
                Err(f) => out.failures.push(f),
            }
        }
        out
    }
}

pub fn run_pipeline(manifest: &Manifest, config: PipelineConfig) -> Result<PipelineOutput, ConfigError> {
    Ok(Pipeline::from_config(config)?.run(manifest))
}

/// Renders the category report in the requested format.
pub fn emit_report(records: &[EvaluationRecord], format: ReportFormat) -> Result<Vec<u8>, MetricsError> {
    let report = aggregate_report(records)?;
    Ok(match format {
        ReportFormat::Table => render_table(&report).into_bytes(),
        ReportFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
            bytes.push(b'\n');
            bytes
        }
    })
}
