//! Generative error correction: prompt rendering and correction backends.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::wer;
use crate::nbest::SelectionResult;
use crate::remote::{JsonClient, RemoteError};
use crate::transcript::normalize_tokens;

/// First line of every correction prompt.
pub const INSTRUCTION: &str = "Given the following n-best list of hypotheses from ASR, provide the correct transcription:";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GerError {
    #[error("cannot build a prompt from an empty selection")]
    EmptySelection,
    #[error("hypothesis {rank} contains a line break")]
    MultilineHypothesis { rank: u32 },
    #[error("the oracle backend needs a reference transcription")]
    MissingReference,
    #[error(transparent)]
    Remote(#[from] RemoteError),
}

impl GerError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, GerError::Remote(e) if e.is_retryable())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GerPrompt {
    pub rendered: String,
    pub hypothesis_count: usize,
    hypotheses: Vec<String>,
}

impl GerPrompt {
    /// Hypothesis texts in the order they appear in the prompt.
    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }
}

/// Renders the instruction line followed by one `- {text}` line per selected
/// hypothesis, in original rank order. No trailing newline.
pub fn build_prompt(selected: &SelectionResult) -> Result<GerPrompt, GerError> {
    if selected.selected.is_empty() {
        return Err(GerError::EmptySelection);
    }
    let mut hyps: Vec<_> = selected.selected.iter().collect();
    hyps.sort_by_key(|h| h.rank);

    let mut rendered = String::from(INSTRUCTION);
    for h in &hyps {
        if h.text.contains(['\n', '\r']) {
            return Err(GerError::MultilineHypothesis { rank: h.rank });
        }
        rendered.push_str("\n- ");
        rendered.push_str(&h.text);
    }
    Ok(GerPrompt {
        rendered,
        hypothesis_count: hyps.len(),
        hypotheses: hyps.into_iter().map(|h| h.text.clone()).collect(),
    })
}

pub trait GerBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Produces the corrected transcription. `reference` is only consulted by
    /// evaluation-time probes such as [`OracleBackend`].
    fn correct(&self, prompt: &GerPrompt, reference: Option<&str>) -> Result<String, GerError>;
}

/// Returns the top-ranked hypothesis untouched: the no-correction baseline.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassthroughBackend;

impl GerBackend for PassthroughBackend {
    fn name(&self) -> &str {
        "passthrough"
    }

    fn correct(&self, prompt: &GerPrompt, _reference: Option<&str>) -> Result<String, GerError> {
        prompt.hypotheses.first().cloned().ok_or(GerError::EmptySelection)
    }
}

/// Picks the prompt hypothesis with the fewest word errors against the
/// reference, first one on ties. An upper bound on what any correction model
/// restricted to choosing among its inputs could achieve.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleBackend;

impl GerBackend for OracleBackend {
    fn name(&self) -> &str {
        "oracle"
    }

    fn correct(&self, prompt: &GerPrompt, reference: Option<&str>) -> Result<String, GerError> {
        let reference = normalize_tokens(reference.ok_or(GerError::MissingReference)?);
        prompt
            .hypotheses
            .iter()
            .enumerate()
            .min_by_key(|(i, h)| (wer(&reference, &normalize_tokens(h)).errors(), *i))
            .map(|(_, h)| h.clone())
            .ok_or(GerError::EmptySelection)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationParams {
    pub max_new_tokens: u32,
    pub temperature: f64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            max_new_tokens: 256,
            temperature: 0.0,
        }
    }
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    prompt: &'a str,
    max_new_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct GenerateResponse {
    text: String,
}

/// Client for `POST /generate`. Retries are handled by the client's policy.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    client: JsonClient,
    params: GenerationParams,
}

impl RemoteBackend {
    pub fn new(client: JsonClient, params: GenerationParams) -> Self {
        RemoteBackend { client, params }
    }
}

impl GerBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn correct(&self, prompt: &GerPrompt, _reference: Option<&str>) -> Result<String, GerError> {
        let request = GenerateRequest {
            prompt: &prompt.rendered,
            max_new_tokens: self.params.max_new_tokens,
            temperature: self.params.temperature,
        };
        let response: GenerateResponse = self.client.post("/generate", &request)?;
        Ok(response.text.trim().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    pub utterance_id: String,
    /// May be empty.
    pub final_text: String,
    pub selected: SelectionResult,
    pub prompt: GerPrompt,
    pub backend_name: String,
    pub latency_s: f64,
}

/// Builds the prompt for `selected` and runs `backend` on it.
pub fn correct_selection(
    backend: &dyn GerBackend,
    selected: SelectionResult,
    reference: Option<&str>,
) -> Result<CorrectionResult, GerError> {
    let prompt = build_prompt(&selected)?;
    let started = Instant::now();
    let final_text = backend.correct(&prompt, reference)?;
    Ok(CorrectionResult {
        utterance_id: selected.utterance_id.clone(),
        final_text,
        selected,
        prompt,
        backend_name: backend.name().to_string(),
        latency_s: started.elapsed().as_secs_f64(),
    })
}
