//! Annotated speech transcripts.
//!
//! Reference transcriptions carry two kinds of bracketed annotation:
//!
//! * `[...]` holds the prompt or question the speaker was answering. It has no
//!   acoustic evidence in the recording and is dropped from every target.
//! * `(...)` marks acoustically present events: partial attempts such as
//!   `(che- che-)` or `(d-*)`, interviewer speech tagged `(cs: ...)`, and
//!   off-prompt speaker remarks tagged `(ss: ...)`.
//!
//! [`parse_annotations`] turns raw text into an [`AnnotatedTranscript`], from
//! which the ASR target, the verbatim (with disfluencies) reference and the
//! clean reference are derived. Offsets are byte offsets into the raw text;
//! every delimiter is ASCII so they always fall on character boundaries.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("unbalanced bracket {bracket:?} at byte {position}")]
    UnbalancedBrackets { position: usize, bracket: char },
    #[error("nested bracket {bracket:?} at byte {position} is not supported")]
    NestedBrackets { position: usize, bracket: char },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    /// `[...]`
    PromptContext,
    /// `(...)` without a tag.
    Disfluency,
    /// `(cs: ...)`
    InterviewerSpeech,
    /// `(ss: ...)`
    SpeakerAside,
}

impl SpanKind {
    pub fn is_round(self) -> bool {
        !matches!(self, SpanKind::PromptContext)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSpan {
    pub kind: SpanKind,
    /// Covers the delimiters as well as the content.
    pub range: Range<usize>,
    /// Content with delimiters and any tag prefix removed, trimmed.
    pub inner: String,
}

/// A view over the raw text, alternating plain gaps and annotation spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece<'a> {
    Text(&'a str),
    Span(&'a AnnotationSpan, &'a str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedTranscript {
    raw: String,
    spans: Vec<AnnotationSpan>,
}

impl AnnotatedTranscript {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn spans(&self) -> &[AnnotationSpan] {
        &self.spans
    }

    pub fn pieces(&self) -> Vec<Piece<'_>> {
        let mut out = Vec::with_capacity(self.spans.len() * 2 + 1);
        let mut cursor = 0;
        for span in &self.spans {
            if span.range.start > cursor {
                out.push(Piece::Text(&self.raw[cursor..span.range.start]));
            }
            out.push(Piece::Span(span, &self.raw[span.range.clone()]));
            cursor = span.range.end;
        }
        if cursor < self.raw.len() {
            out.push(Piece::Text(&self.raw[cursor..]));
        }
        out
    }

    /// Rebuilds the raw text from gap text and span text.
    pub fn reconstruct(&self) -> String {
        self.pieces()
            .into_iter()
            .map(|p| match p {
                Piece::Text(t) => t,
                Piece::Span(_, t) => t,
            })
            .collect()
    }

    /// Keeps gap text and the spans accepted by `keep`. Dropped spans become a
    /// single space so neighbouring words never fuse.
    fn render(&self, keep: impl Fn(SpanKind) -> bool) -> String {
        let mut out = String::with_capacity(self.raw.len());
        for piece in self.pieces() {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Span(span, t) if keep(span.kind) => out.push_str(t),
                Piece::Span(..) => out.push(' '),
            }
        }
        collapse_whitespace(&out)
    }
}

pub fn parse_annotations(raw: &str) -> Result<AnnotatedTranscript, TranscriptError> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, char)> = None;

    for (pos, ch) in raw.char_indices() {
        match ch {
            '[' | '(' => {
                if open.is_some() {
                    return Err(TranscriptError::NestedBrackets {
                        position: pos,
                        bracket: ch,
                    });
                }
                open = Some((pos, ch));
            }
            ']' | ')' => {
                let expected = if ch == ']' { '[' } else { '(' };
                match open {
                    Some((start, opener)) if opener == expected => {
                        let content = &raw[start + 1..pos];
                        spans.push(make_span(opener, start..pos + 1, content));
                        open = None;
                    }
                    _ => {
                        return Err(TranscriptError::UnbalancedBrackets {
                            position: pos,
                            bracket: ch,
                        })
                    }
                }
            }
            _ => {}
        }
    }

    if let Some((position, bracket)) = open {
        return Err(TranscriptError::UnbalancedBrackets { position, bracket });
    }

    Ok(AnnotatedTranscript {
        raw: raw.to_string(),
        spans,
    })
}

fn make_span(opener: char, range: Range<usize>, content: &str) -> AnnotationSpan {
    if opener == '[' {
        return AnnotationSpan {
            kind: SpanKind::PromptContext,
            range,
            inner: content.trim().to_string(),
        };
    }

    let mut kind = SpanKind::Disfluency;
    let mut rest = content.trim();
    // "(cs: cs: x)" would otherwise leave a tag at the front of `inner`.
    while let Some((tagged, after)) = strip_tag(rest) {
        if kind == SpanKind::Disfluency {
            kind = tagged;
        }
        rest = after.trim_start();
    }
    AnnotationSpan {
        kind,
        range,
        inner: rest.trim().to_string(),
    }
}

fn strip_tag(s: &str) -> Option<(SpanKind, &str)> {
    let head = s.get(..3)?;
    let kind = if head.eq_ignore_ascii_case("cs:") {
        SpanKind::InterviewerSpeech
    } else if head.eq_ignore_ascii_case("ss:") {
        SpanKind::SpeakerAside
    } else {
        return None;
    };
    Some((kind, &s[3..]))
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Training target: prompt context removed, every round-bracket span kept
/// verbatim including the parentheses.
pub fn asr_target(t: &AnnotatedTranscript) -> String {
    t.render(SpanKind::is_round)
}

/// The "with disfluencies" evaluation reference. Same text as [`asr_target`].
pub fn verbatim_reference(t: &AnnotatedTranscript) -> String {
    asr_target(t)
}

/// The "without disfluencies" evaluation reference: every annotation removed.
pub fn clean_reference(t: &AnnotatedTranscript) -> String {
    t.render(|_| false)
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2018}')
}

/// Lowercased word tokens for scoring.
///
/// Apostrophes are deleted (`that's` becomes `thats`), hyphens and asterisks
/// are kept inside tokens since they mark partial attempts, and every other
/// non-alphanumeric character (parentheses included) separates tokens. Tokens
/// left with no alphanumeric character are dropped.
pub fn normalize_tokens(s: &str) -> Vec<String> {
    let mut buf = String::with_capacity(s.len());
    for c in s.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() || c == '-' || c == '*' {
            buf.push(c);
        } else if is_apostrophe(c) {
        } else {
            buf.push(' ');
        }
    }
    buf.split_whitespace()
        .filter(|tok| tok.chars().any(char::is_alphanumeric))
        .map(str::to_string)
        .collect()
}

/// [`normalize_tokens`] joined back with single spaces.
pub fn normalize_text(s: &str) -> String {
    normalize_tokens(s).join(" ")
}
