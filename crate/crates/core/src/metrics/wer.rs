use serde::{Deserialize, Serialize};

/// One step of a reference-to-hypothesis alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Hit,
    Substitution,
    Deletion,
    Insertion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WerBreakdown {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub hits: usize,
    pub ref_len: usize,
    pub wer: f64,
}

impl WerBreakdown {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    fn from_ops(ops: &[EditOp]) -> Self {
        let count = |op| ops.iter().filter(|&&o| o == op).count();
        let (hits, substitutions, deletions, insertions) = (
            count(EditOp::Hit),
            count(EditOp::Substitution),
            count(EditOp::Deletion),
            count(EditOp::Insertion),
        );
        let ref_len = hits + substitutions + deletions;
        WerBreakdown {
            substitutions,
            deletions,
            insertions,
            hits,
            ref_len,
            wer: (substitutions + deletions + insertions) as f64 / ref_len.max(1) as f64,
        }
    }
}

/// Minimal-cost alignment of `hypothesis` against `reference`, in reference
/// order. Among optimal alignments the backtrace prefers hit, then
/// substitution, then deletion, then insertion.
pub fn align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Vec<EditOp> {
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut cost = vec![0usize; (n + 1) * width];
    for (j, c) in cost[..width].iter_mut().enumerate() {
        *c = j;
    }
    for i in 1..=n {
        cost[i * width] = i;
        for j in 1..=m {
            let diag = cost[(i - 1) * width + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = cost[(i - 1) * width + j] + 1;
            let ins = cost[i * width + j - 1] + 1;
            cost[i * width + j] = diag.min(del).min(ins);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * width + j];
        if i > 0 && j > 0 {
            let diag = cost[(i - 1) * width + j - 1];
            let same = reference[i - 1] == hypothesis[j - 1];
            if same && here == diag {
                ops.push(EditOp::Hit);
                i -= 1;
                j -= 1;
                continue;
            }
            if !same && here == diag + 1 {
                ops.push(EditOp::Substitution);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == cost[(i - 1) * width + j] + 1 {
            ops.push(EditOp::Deletion);
            i -= 1;
        } else {
            ops.push(EditOp::Insertion);
            j -= 1;
        }
    }
    ops.reverse();
    ops
}

/// Word error rate with its substitution/deletion/insertion breakdown.
/// An empty reference uses a denominator of 1.
pub fn wer<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> WerBreakdown {
    WerBreakdown::from_ops(&align(reference, hypothesis))
}
