//! Three-component semantic score.
//!
//! `100 * (w_semantic * semantic + w_phonetic * phonetic + w_entailment * entailment)`
//! where each component is a [`Scorer`] returning a value in `[0, 1]`.
//!
//! Faithful semantic similarity and entailment need external models and are
//! reached through [`RemoteScorer`]. The lexical scorers in this module are
//! stand-ins that let the pipeline run offline; their numbers are not
//! comparable with model-based scores.

use std::collections::HashMap;
use std::sync::Arc;

use rphonetic::DoubleMetaphone;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::MetricsError;
use crate::nbest::normalized_edit_distance;
use crate::remote::{JsonClient, RemoteError};
use crate::transcript::normalize_tokens;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{component} scorer failed: {cause}")]
pub struct ScorerError {
    pub component: String,
    pub cause: String,
}

pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;

    /// Similarity of `hyp` to `reference` in `[0, 1]`.
    fn score(&self, hyp: &str, reference: &str) -> Result<f64, ScorerError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemScoreWeights {
    pub w_semantic: f64,
    pub w_phonetic: f64,
    pub w_entailment: f64,
}

impl Default for SemScoreWeights {
    fn default() -> Self {
        SemScoreWeights {
            w_semantic: 1.0 / 3.0,
            w_phonetic: 1.0 / 3.0,
            w_entailment: 1.0 / 3.0,
        }
    }
}

impl SemScoreWeights {
    pub fn new(w_semantic: f64, w_phonetic: f64, w_entailment: f64) -> Result<Self, MetricsError> {
        let w = SemScoreWeights {
            w_semantic,
            w_phonetic,
            w_entailment,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let parts = [self.w_semantic, self.w_phonetic, self.w_entailment];
        if parts.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(MetricsError::InvalidWeights(format!(
                "{parts:?}: each weight must be in [0, 1]"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricsError::InvalidWeights(format!(
                "{parts:?}: weights sum to {sum}, not 1"
            )));
        }
        Ok(())
    }
}

impl std::str::FromStr for SemScoreWeights {
    type Err = MetricsError;

    /// Parses `"w1,w2,w3"` (semantic, phonetic, entailment).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| MetricsError::InvalidWeights(format!("{s:?}: {e}")))?;
        match parts.as_slice() {
            [a, b, c] => SemScoreWeights::new(*a, *b, *c),
            _ => Err(MetricsError::InvalidWeights(format!(
                "{s:?}: expected three comma-separated weights"
            ))),
        }
    }
}

/// The three scorers, shared between worker threads.
#[derive(Clone)]
pub struct ScorerSet {
    pub semantic: Arc<dyn Scorer>,
    pub phonetic: Arc<dyn Scorer>,
    pub entailment: Arc<dyn Scorer>,
}

impl ScorerSet {
    /// Offline scorers: phonetic plus the lexical stand-ins.
    pub fn builtin() -> Self {
        ScorerSet {
            semantic: Arc::new(LexicalOverlapScorer),
            phonetic: Arc::new(PhoneticScorer),
            entailment: Arc::new(LexicalEntailmentScorer),
        }
    }

    /// Semantic and entailment components served by a scoring endpoint.
    pub fn remote(client: JsonClient) -> Self {
        ScorerSet {
            semantic: Arc::new(RemoteScorer::new(client.clone(), RemoteComponent::Semantic)),
            phonetic: Arc::new(PhoneticScorer),
            entailment: Arc::new(RemoteScorer::new(client, RemoteComponent::Entailment)),
        }
    }

    /// True when any component is a lexical stand-in.
    pub fn uses_fallback(&self) -> bool {
        [&self.semantic, &self.entailment]
            .iter()
            .any(|s| s.name().starts_with("lexical"))
    }
}

fn component(scorer: &dyn Scorer, hyp: &str, reference: &str) -> Result<f64, MetricsError> {
    let value = scorer.score(hyp, reference).map_err(MetricsError::ScorerFailure)?;
    if !value.is_finite() {
        return Err(MetricsError::ScorerFailure(ScorerError {
            component: scorer.name().to_string(),
            cause: format!("non-finite score {value}"),
        }));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Weighted composite in `[0, 100]`. Scorer failures propagate.
pub fn semscore(hyp: &str, reference: &str, scorers: &ScorerSet, weights: &SemScoreWeights) -> Result<f64, MetricsError> {
    let semantic = component(scorers.semantic.as_ref(), hyp, reference)?;
    let phonetic = component(scorers.phonetic.as_ref(), hyp, reference)?;
    let entailment = component(scorers.entailment.as_ref(), hyp, reference)?;
    let combined = weights.w_semantic * semantic + weights.w_phonetic * phonetic + weights.w_entailment * entailment;
    Ok((100.0 * combined).clamp(0.0, 100.0))
}

/// Double Metaphone primary codes of the normalized tokens, space-joined.
pub fn phonetic_encoding(text: &str) -> String {
    let encoder = DoubleMetaphone::new(None);
    normalize_tokens(text)
        .iter()
        .map(|tok| encoder.double_metaphone(tok).primary())
        .collect::<Vec<_>>()
        .join(" ")
}

/// `1 - normalized edit distance` between the phonetic encodings.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhoneticScorer;

impl Scorer for PhoneticScorer {
    fn name(&self) -> &str {
        "phonetic"
    }

    fn score(&self, hyp: &str, reference: &str) -> Result<f64, ScorerError> {
        Ok(1.0 - normalized_edit_distance(&phonetic_encoding(hyp), &phonetic_encoding(reference)))
    }
}

/// F1 over the multiset of normalized tokens. Two empty texts score 1.
pub fn token_f1(hyp: &str, reference: &str) -> f64 {
    let h = normalize_tokens(hyp);
    let r = normalize_tokens(reference);
    if h.is_empty() && r.is_empty() {
        return 1.0;
    }
    if h.is_empty() || r.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for tok in &r {
        *counts.entry(tok).or_default() += 1;
    }
    let mut overlap = 0usize;
    for tok in &h {
        if let Some(c) = counts.get_mut(tok.as_str()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / h.len() as f64;
    let recall = overlap as f64 / r.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Lexical stand-in for semantic similarity; not a BERTScore substitute.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalOverlapScorer;

impl Scorer for LexicalOverlapScorer {
    fn name(&self) -> &str {
        "lexical-overlap"
    }

    fn score(&self, hyp: &str, reference: &str) -> Result<f64, ScorerError> {
        Ok(token_f1(hyp, reference))
    }
}

/// Lexical stand-in for entailment: 1 on normalized equality, else token F1.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalEntailmentScorer;

impl Scorer for LexicalEntailmentScorer {
    fn name(&self) -> &str {
        "lexical-entailment"
    }

    fn score(&self, hyp: &str, reference: &str) -> Result<f64, ScorerError> {
        if normalize_tokens(hyp) == normalize_tokens(reference) {
            Ok(1.0)
        } else {
            Ok(token_f1(hyp, reference))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemoteComponent {
    Semantic,
    Entailment,
}

#[derive(Serialize)]
struct ScorePair<'a> {
    hyp: &'a str,
    #[serde(rename = "ref")]
    reference: &'a str,
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    component: RemoteComponent,
    pairs: Vec<ScorePair<'a>>,
}

#[derive(Deserialize)]
struct ScoreResponse {
    scores: Vec<f64>,
}

/// Client for `POST /score`.
#[derive(Debug, Clone)]
pub struct RemoteScorer {
    client: JsonClient,
    component: RemoteComponent,
    name: String,
}

impl RemoteScorer {
    pub fn new(client: JsonClient, component: RemoteComponent) -> Self {
        let name = match component {
            RemoteComponent::Semantic => "remote-semantic",
            RemoteComponent::Entailment => "remote-entailment",
        };
        RemoteScorer {
            client,
            component,
            name: name.to_string(),
        }
    }

    /// Scores a batch of `(hyp, reference)` pairs in one request.
    pub fn score_pairs(&self, pairs: &[(&str, &str)]) -> Result<Vec<f64>, RemoteError> {
        let request = ScoreRequest {
            component: self.component,
            pairs: pairs.iter().map(|&(hyp, reference)| ScorePair { hyp, reference }).collect(),
        };
        let response: ScoreResponse = self.client.post("/score", &request)?;
        let malformed = |message: String| RemoteError::MalformedResponse {
            url: self.client.url("/score"),
            message,
        };
        if response.scores.len() != pairs.len() {
            return Err(malformed(format!(
                "expected {} scores, got {}",
                pairs.len(),
                response.scores.len()
            )));
        }
        if let Some(bad) = response.scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(malformed(format!("score {bad} outside [0, 1]")));
        }
        Ok(response.scores)
    }
}

impl Scorer for RemoteScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn score(&self, hyp: &str, reference: &str) -> Result<f64, ScorerError> {
        self.score_pairs(&[(hyp, reference)]).map(|s| s[0]).map_err(|e| ScorerError {
            component: self.name.clone(),
            cause: e.to_string(),
        })
    }
}
