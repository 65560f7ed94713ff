//! WER, the three-component semantic score, and the dual-reference protocol.

mod report;
mod semscore;
mod wer;

pub use report::{aggregate_report, render_table, CategoryReport, ReportRow};
pub use semscore::{
    phonetic_encoding, semscore, token_f1, LexicalEntailmentScorer, LexicalOverlapScorer, PhoneticScorer, RemoteComponent,
    RemoteScorer, Scorer, ScorerError, ScorerSet, SemScoreWeights,
};
pub use wer::{align, wer, EditOp, WerBreakdown};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nbest::normalized_edit_distance;
use crate::transcript::{normalize_text, normalize_tokens};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error(transparent)]
    ScorerFailure(#[from] ScorerError),
    #[error("invalid SemScore weights {0}")]
    InvalidWeights(String),
    #[error("no evaluation records to aggregate")]
    EmptyInput,
    #[error("unknown utterance category {0:?}")]
    UnknownCategory(String),
}

/// Utterance categories, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    /// Digital assistant commands.
    DAC,
    /// Sentences from novels.
    SN,
    /// Spontaneous speech.
    SS,
    /// Single words.
    SW,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::DAC, Category::SN, Category::SS, Category::SW];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::DAC => "DAC",
            Category::SN => "SN",
            Category::SS => "SS",
            Category::SW => "SW",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| MetricsError::UnknownCategory(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceChoice {
    Verbatim,
    Clean,
}

/// Scores of one hypothesis against whichever reference is nearer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReferenceScore {
    pub chosen_reference: ReferenceChoice,
    pub verbatim_distance: f64,
    pub clean_distance: f64,
    pub wer: WerBreakdown,
    pub semscore: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub utterance_id: String,
    pub category: Category,
    pub chosen_reference: ReferenceChoice,
    pub wer: WerBreakdown,
    pub semscore: f64,
}

impl EvaluationRecord {
    pub fn new(utterance_id: impl Into<String>, category: Category, score: DualReferenceScore) -> Self {
        EvaluationRecord {
            utterance_id: utterance_id.into(),
            category,
            chosen_reference: score.chosen_reference,
            wer: score.wer,
            semscore: score.semscore,
        }
    }
}

/// WER and SemScore of `hyp` against a single reference.
pub fn evaluate_single(
    hyp: &str,
    reference: &str,
    weights: &SemScoreWeights,
    scorers: &ScorerSet,
) -> Result<(WerBreakdown, f64), MetricsError> {
    let breakdown = wer(&normalize_tokens(reference), &normalize_tokens(hyp));
    let sem = semscore(hyp, reference, scorers, weights)?;
    Ok((breakdown, sem))
}

/// Picks the reference (verbatim or clean) with the lower character-level
/// normalized edit distance to `hyp`, after text normalization, and scores
/// both metrics against it. Ties go to the verbatim reference.
pub fn dual_reference_evaluate(
    hyp: &str,
    verbatim: &str,
    clean: &str,
    weights: &SemScoreWeights,
    scorers: &ScorerSet,
) -> Result<DualReferenceScore, MetricsError> {
    let normalized_hyp = normalize_text(hyp);
    let verbatim_distance = normalized_edit_distance(&normalized_hyp, &normalize_text(verbatim));
    let clean_distance = normalized_edit_distance(&normalized_hyp, &normalize_text(clean));
    let (chosen_reference, reference) = if clean_distance < verbatim_distance {
        (ReferenceChoice::Clean, clean)
    } else {
        (ReferenceChoice::Verbatim, verbatim)
    };
    let (wer, semscore) = evaluate_single(hyp, reference, weights, scorers)?;
    Ok(DualReferenceScore {
        chosen_reference,
        verbatim_distance,
        clean_distance,
        wer,
        semscore,
    })
}
