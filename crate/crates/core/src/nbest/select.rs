use serde::{Deserialize, Serialize};

use super::{normalized_edit_distance, NBestError, NBestList};
use crate::transcript::normalize_text;

/// Beam width the ASR stage is expected to produce.
pub const DEFAULT_N_BEST: usize = 20;
/// Hypotheses handed to the correction model.
pub const DEFAULT_K_SELECT: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedHypothesis {
    pub rank: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub utterance_id: String,
    pub source_n: usize,
    pub k: usize,
    /// Ordered by original rank.
    pub selected: Vec<SelectedHypothesis>,
    /// Original ranks in the order the greedy picked them.
    pub selection_order: Vec<u32>,
}

impl SelectionResult {
    pub fn ranks(&self) -> Vec<u32> {
        self.selected.iter().map(|s| s.rank).collect()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.selected.iter().map(|s| s.text.as_str()).collect()
    }
}

/// Greedy farthest-point (maximin) selection of `k` hypotheses.
///
/// Rank 1 is always kept. Each further pick is the candidate whose minimum
/// normalized edit distance to the already chosen set is largest, ties going
/// to the better rank. Distances are taken between normalized texts so that
/// casing and punctuation variants do not count as diversity.
pub fn select_diverse(nbest: &NBestList, k: usize) -> Result<SelectionResult, NBestError> {
    if k == 0 {
        return Err(NBestError::InvalidK(k));
    }
    let hyps = nbest.hypotheses();
    if hyps.is_empty() {
        return Err(NBestError::EmptyPool {
            utterance_id: nbest.utterance_id().to_string(),
        });
    }

    let n = hyps.len();
    let mut picked = vec![false; n];
    let mut order = Vec::with_capacity(k.min(n));

    if n <= k {
        picked.fill(true);
        order.extend(0..n);
    } else {
        let normalized: Vec<String> = hyps.iter().map(|h| normalize_text(&h.text)).collect();
        picked[0] = true;
        order.push(0);
        // Distance from each candidate to its nearest selected hypothesis.
        let mut nearest: Vec<f64> = normalized
            .iter()
            .map(|t| normalized_edit_distance(t, &normalized[0]))
            .collect();

        while order.len() < k {
            let mut best: Option<usize> = None;
            for i in 0..n {
                if picked[i] {
                    continue;
                }
                if best.is_none_or(|b| nearest[i] > nearest[b]) {
                    best = Some(i);
                }
            }
            let chosen = best.expect("n > k leaves unselected candidates");
            picked[chosen] = true;
            order.push(chosen);
            for i in 0..n {
                if !picked[i] {
                    let d = normalized_edit_distance(&normalized[i], &normalized[chosen]);
                    if d < nearest[i] {
                        nearest[i] = d;
                    }
                }
            }
        }
    }

    let selected = hyps
        .iter()
        .zip(&picked)
        .filter(|(_, &p)| p)
        .map(|(h, _)| SelectedHypothesis {
            rank: h.rank,
            text: h.text.clone(),
        })
        .collect();

    Ok(SelectionResult {
        utterance_id: nbest.utterance_id().to_string(),
        source_n: n,
        k,
        selected,
        selection_order: order.into_iter().map(|i| hyps[i].rank).collect(),
    })
}
