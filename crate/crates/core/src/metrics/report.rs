use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Category, EvaluationRecord, MetricsError};

/// Aggregate over a group of utterances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub count: usize,
    /// Total substitutions, deletions and insertions.
    pub errors: usize,
    pub ref_words: usize,
    /// Corpus-level WER as a percentage: `100 * errors / max(1, ref_words)`.
    pub wer: f64,
    /// Mean SemScore.
    pub semscore: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    /// Non-empty categories in DAC, SN, SS, SW order.
    pub categories: Vec<ReportRow>,
    pub overall: ReportRow,
}

fn row(label: &str, records: &[&EvaluationRecord]) -> ReportRow {
    let errors: usize = records.iter().map(|r| r.wer.errors()).sum();
    let ref_words: usize = records.iter().map(|r| r.wer.ref_len).sum();
    // Sorted before summing so the mean does not depend on input order.
    let mut sems: Vec<f64> = records.iter().map(|r| r.semscore).collect();
    sems.sort_by(f64::total_cmp);
    ReportRow {
        label: label.to_string(),
        count: records.len(),
        errors,
        ref_words,
        wer: 100.0 * errors as f64 / ref_words.max(1) as f64,
        semscore: sems.iter().sum::<f64>() / records.len() as f64,
    }
}

pub fn aggregate_report(records: &[EvaluationRecord]) -> Result<CategoryReport, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut by_category: BTreeMap<Category, Vec<&EvaluationRecord>> = BTreeMap::new();
    for r in records {
        by_category.entry(r.category).or_default().push(r);
    }
    let categories = by_category.iter().map(|(category, rs)| row(category.as_str(), rs)).collect();
    let all: Vec<&EvaluationRecord> = records.iter().collect();
    Ok(CategoryReport {
        categories,
        overall: row("Overall", &all),
    })
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Aligned text table: `Category  #  WER  SemScore`, one line per category
/// and a final `Overall` line. Counts use thousands separators; rates have
/// two decimals.
pub fn render_table(report: &CategoryReport) -> String {
    let header = ["Category", "#", "WER", "SemScore"];
    let cells: Vec<[String; 4]> = report
        .categories
        .iter()
        .chain(std::iter::once(&report.overall))
        .map(|r| {
            [
                r.label.clone(),
                thousands(r.count),
                format!("{:.2}", r.wer),
                format!("{:.2}", r.semscore),
            ]
        })
        .collect();

    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }

    let line = |cols: [&str; 4]| {
        format!(
            "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}\n",
            cols[0],
            cols[1],
            cols[2],
            cols[3],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2],
            w3 = widths[3]
        )
    };

    let mut out = line(header);
    for row in &cells {
        out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
    }
    out
}
