//! N-best hypothesis lists and diversity-based selection.

mod distance;
mod select;
mod wire;

pub use distance::{levenshtein_chars, normalized_edit_distance};
pub use select::{select_diverse, SelectedHypothesis, SelectionResult, DEFAULT_K_SELECT, DEFAULT_N_BEST};
pub use wire::{parse_nbest_batch, parse_nbest_file, write_nbest_batch, write_nbest_file};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NBestError {
    #[error("malformed n-best document at {path}: {message}")]
    MalformedDocument { path: String, message: String },
    #[error("rank gap in {path}: expected rank {expected}, found {found}")]
    RankGap { path: String, expected: u32, found: u32 },
    #[error("duplicate rank {rank} in {path}")]
    DuplicateRank { path: String, rank: u32 },
    #[error("n-best document for {utterance_id} has no segments")]
    EmptySegments { utterance_id: String },
    #[error("n-best list for {utterance_id} has no hypotheses")]
    EmptyPool { utterance_id: String },
    #[error("k must be at least 1, got {0}")]
    InvalidK(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    /// 1 is the top hypothesis.
    pub rank: u32,
    pub text: String,
    /// Model confidence or log-probability, higher is better.
    pub score: Option<f64>,
}

impl Hypothesis {
    pub fn new(rank: u32, text: impl Into<String>) -> Self {
        Hypothesis {
            rank,
            text: text.into(),
            score: None,
        }
    }
}

/// Ranked candidates for one utterance (or one segment of it).
#[derive(Debug, Clone, PartialEq)]
pub struct NBestList {
    utterance_id: String,
    hypotheses: Vec<Hypothesis>,
}

impl NBestList {
    /// Validates ranks and score ordering. Hypotheses may arrive in any order;
    /// they are stored sorted by rank.
    pub fn new(utterance_id: impl Into<String>, hypotheses: Vec<Hypothesis>) -> Result<Self, NBestError> {
        let utterance_id = utterance_id.into();
        let hypotheses = validate_hypotheses(hypotheses, "hypotheses")?;
        Ok(NBestList {
            utterance_id,
            hypotheses,
        })
    }

    /// Builds a list from texts in rank order, rank 1 first.
    pub fn from_texts<S: Into<String>>(utterance_id: impl Into<String>, texts: impl IntoIterator<Item = S>) -> Self {
        let hypotheses = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| Hypothesis::new(i as u32 + 1, t))
            .collect();
        NBestList {
            utterance_id: utterance_id.into(),
            hypotheses,
        }
    }

    pub fn utterance_id(&self) -> &str {
        &self.utterance_id
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn top(&self) -> Option<&Hypothesis> {
        self.hypotheses.first()
    }

    /// Keeps the `n` best hypotheses.
    pub fn truncate(&mut self, n: usize) {
        self.hypotheses.truncate(n);
    }
}

/// One decoded chunk of a long recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start_s: Option<f64>,
    pub end_s: Option<f64>,
    pub hypotheses: Vec<Hypothesis>,
}

/// All per-segment N-best lists of one utterance, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedNBest {
    pub utterance_id: String,
    pub segments: Vec<Segment>,
}

impl SegmentedNBest {
    pub fn single(list: NBestList) -> Self {
        SegmentedNBest {
            utterance_id: list.utterance_id,
            segments: vec![Segment {
                start_s: None,
                end_s: None,
                hypotheses: list.hypotheses,
            }],
        }
    }

    pub fn max_segment_len(&self) -> usize {
        self.segments.iter().map(|s| s.hypotheses.len()).max().unwrap_or(0)
    }

    /// Keeps at most `n` hypotheses per segment.
    pub fn truncate(&mut self, n: usize) {
        for seg in &mut self.segments {
            seg.hypotheses.truncate(n);
        }
    }
}

pub(crate) fn validate_hypotheses(mut hyps: Vec<Hypothesis>, path: &str) -> Result<Vec<Hypothesis>, NBestError> {
    if hyps.is_empty() {
        return Err(NBestError::MalformedDocument {
            path: path.to_string(),
            message: "hypothesis list is empty".into(),
        });
    }
    for (i, h) in hyps.iter().enumerate() {
        if h.rank == 0 {
            return Err(NBestError::MalformedDocument {
                path: format!("{path}[{i}].rank"),
                message: "rank must be >= 1".into(),
            });
        }
        if h.text.contains(['\n', '\r']) {
            return Err(NBestError::MalformedDocument {
                path: format!("{path}[{i}].text"),
                message: "hypothesis text must not contain a line break".into(),
            });
        }
        if h.score.is_some_and(|s| !s.is_finite()) {
            return Err(NBestError::MalformedDocument {
                path: format!("{path}[{i}].score"),
                message: "score must be finite".into(),
            });
        }
    }
    hyps.sort_by_key(|h| h.rank);
    for (i, h) in hyps.iter().enumerate() {
        let expected = i as u32 + 1;
        if h.rank != expected {
            if i > 0 && hyps[i - 1].rank == h.rank {
                return Err(NBestError::DuplicateRank {
                    path: path.to_string(),
                    rank: h.rank,
                });
            }
            return Err(NBestError::RankGap {
                path: path.to_string(),
                expected,
                found: h.rank,
            });
        }
    }
    for pair in hyps.windows(2) {
        if let (Some(a), Some(b)) = (pair[0].score, pair[1].score) {
            if b > a {
                return Err(NBestError::MalformedDocument {
                    path: format!("{path}[rank {}].score", pair[1].rank),
                    message: format!("score {b} exceeds the score {a} of the better-ranked hypothesis"),
                });
            }
        }
    }
    Ok(hyps)
}

/// Joins the k-th ranked hypothesis of every segment into the k-th ranked
/// hypothesis of the whole utterance.
///
/// A segment with fewer hypotheses than the longest one repeats its last
/// ranked text for the missing ranks. Scores are dropped since per-segment
/// scores are not comparable once joined.
pub fn concat_segments(s: &SegmentedNBest) -> Result<NBestList, NBestError> {
    let width = s.max_segment_len();
    if s.segments.is_empty() || width == 0 {
        return Err(NBestError::EmptySegments {
            utterance_id: s.utterance_id.clone(),
        });
    }
    let segments: Vec<&[Hypothesis]> = s
        .segments
        .iter()
        .map(|seg| seg.hypotheses.as_slice())
        .filter(|h| !h.is_empty())
        .collect();

    let hypotheses = (0..width)
        .map(|k| {
            let parts: Vec<&str> = segments
                .iter()
                .map(|hyps| hyps[k.min(hyps.len() - 1)].text.as_str())
                .collect();
            Hypothesis::new(k as u32 + 1, parts.join(" "))
        })
        .collect();

    Ok(NBestList {
        utterance_id: s.utterance_id.clone(),
        hypotheses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(texts: &[&str]) -> Segment {
        Segment {
            start_s: None,
            end_s: None,
            hypotheses: texts
                .iter()
                .enumerate()
                .map(|(i, t)| Hypothesis {
                    rank: i as u32 + 1,
                    text: t.to_string(),
                    score: Some(-(i as f64)),
                })
                .collect(),
        }
    }

    fn texts(list: &NBestList) -> Vec<&str> {
        list.hypotheses().iter().map(|h| h.text.as_str()).collect()
    }

    // Straightforward restatement of the padding rule, used as a cross-check.
    fn concat_oracle(segments: &[Vec<&str>]) -> Vec<String> {
        let n = segments.iter().map(Vec::len).max().unwrap();
        let mut out = vec![String::new(); n];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut words = Vec::new();
            for s in segments {
                let idx = if k < s.len() { k } else { s.len() - 1 };
                words.push(s[idx]);
            }
            *slot = words.join(" ");
        }
        out
    }

    #[test]
    fn concat_single_segment_is_identity_without_scores() {
        let s = SegmentedNBest {
            utterance_id: "u".into(),
            segments: vec![seg(&["a", "b", "c"])],
        };
        let out = concat_segments(&s).unwrap();
        assert_eq!(texts(&out), ["a", "b", "c"]);
        assert!(out.hypotheses().iter().all(|h| h.score.is_none()));
        assert_eq!(out.utterance_id(), "u");
    }

    #[test]
    fn concat_rankwise() {
        let s = SegmentedNBest {
            utterance_id: "u".into(),
            segments: vec![seg(&["a", "b"]), seg(&["c", "d"])],
        };
        assert_eq!(texts(&concat_segments(&s).unwrap()), ["a c", "b d"]);
    }

    #[test]
    fn concat_pads_short_segments() {
        let s = SegmentedNBest {
            utterance_id: "u".into(),
            segments: vec![seg(&["a", "b"]), seg(&["c"])],
        };
        let out = concat_segments(&s).unwrap();
        assert_eq!(texts(&out), concat_oracle(&[vec!["a", "b"], vec!["c"]]));
        assert_eq!(texts(&out), ["a c", "b c"]);

        let s = SegmentedNBest {
            utterance_id: "u".into(),
            segments: vec![seg(&["x"]), seg(&["a", "b", "c"]), seg(&["p", "q"])],
        };
        assert_eq!(
            texts(&concat_segments(&s).unwrap()),
            concat_oracle(&[vec!["x"], vec!["a", "b", "c"], vec!["p", "q"]])
        );
    }

    #[test]
    fn concat_empty() {
        let s = SegmentedNBest {
            utterance_id: "u".into(),
            segments: vec![],
        };
        assert!(matches!(concat_segments(&s), Err(NBestError::EmptySegments { .. })));
    }

    #[test]
    fn list_validation() {
        let h = |r, s: Option<f64>| Hypothesis {
            rank: r,
            text: "x".into(),
            score: s,
        };
        assert!(NBestList::new("u", vec![h(2, None), h(1, None)]).is_ok());
        assert!(matches!(
            NBestList::new("u", vec![h(1, None), h(3, None)]),
            Err(NBestError::RankGap {
                expected: 2,
                found: 3,
                ..
            })
        ));
        assert!(matches!(
            NBestList::new("u", vec![h(1, None), h(1, None)]),
            Err(NBestError::DuplicateRank { rank: 1, .. })
        ));
        assert!(matches!(
            NBestList::new("u", vec![h(1, Some(-2.0)), h(2, Some(-1.0))]),
            Err(NBestError::MalformedDocument { .. })
        ));
        assert!(matches!(
            NBestList::new("u", vec![h(0, None)]),
            Err(NBestError::MalformedDocument { .. })
        ));
    }
}
