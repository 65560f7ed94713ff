//! JSON wire format for N-best documents.
//!
//! ```json
//! {"utterance_id": "u1", "segments": [
//!   {"start_s": 0.0, "end_s": 4.2, "hypotheses": [{"rank": 1, "text": "hi", "score": -0.3}]}
//! ]}
//! ```
//!
//! One document per utterance; batches are JSON Lines.

use serde::{Deserialize, Serialize};

use super::{validate_hypotheses, Hypothesis, NBestError, Segment, SegmentedNBest};

#[derive(Serialize, Deserialize)]
struct WireDocument {
    utterance_id: String,
    segments: Vec<WireSegment>,
}

#[derive(Serialize, Deserialize)]
struct WireSegment {
    start_s: Option<f64>,
    end_s: Option<f64>,
    hypotheses: Vec<Hypothesis>,
}

fn decode(bytes: &[u8]) -> Result<SegmentedNBest, NBestError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let doc: WireDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| NBestError::MalformedDocument {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| NBestError::MalformedDocument {
        path: ".".into(),
        message: e.to_string(),
    })?;

    let segments = doc
        .segments
        .into_iter()
        .enumerate()
        .map(|(i, seg)| {
            let hypotheses = validate_hypotheses(seg.hypotheses, &format!("segments[{i}].hypotheses"))?;
            Ok(Segment {
                start_s: seg.start_s,
                end_s: seg.end_s,
                hypotheses,
            })
        })
        .collect::<Result<Vec<_>, NBestError>>()?;

    Ok(SegmentedNBest {
        utterance_id: doc.utterance_id,
        segments,
    })
}

/// Parses and validates one N-best document.
///
/// A document with zero segments is accepted here (silence); consumers that
/// need hypotheses get [`NBestError::EmptySegments`] from
/// [`super::concat_segments`].
pub fn parse_nbest_file(bytes: &[u8]) -> Result<SegmentedNBest, NBestError> {
    decode(bytes)
}

fn encode(doc: &SegmentedNBest) -> WireDocument {
    WireDocument {
        utterance_id: doc.utterance_id.clone(),
        segments: doc
            .segments
            .iter()
            .map(|s| WireSegment {
                start_s: s.start_s,
                end_s: s.end_s,
                hypotheses: s.hypotheses.clone(),
            })
            .collect(),
    }
}

/// Compact single-line JSON, no trailing newline.
pub fn write_nbest_file(doc: &SegmentedNBest) -> Vec<u8> {
    serde_json::to_vec(&encode(doc)).expect("n-best document serializes")
}

/// Parses a JSON Lines batch. Blank lines are skipped; error paths are
/// prefixed with the 1-based line number.
pub fn parse_nbest_batch(bytes: &[u8]) -> Result<Vec<SegmentedNBest>, NBestError> {
    let prefix = |line: usize, err: NBestError| match err {
        NBestError::MalformedDocument { path, message } => NBestError::MalformedDocument {
            path: format!("line {line}: {path}"),
            message,
        },
        NBestError::RankGap { path, expected, found } => NBestError::RankGap {
            path: format!("line {line}: {path}"),
            expected,
            found,
        },
        NBestError::DuplicateRank { path, rank } => NBestError::DuplicateRank {
            path: format!("line {line}: {path}"),
            rank,
        },
        other => other,
    };
    bytes
        .split(|&b| b == b'\n')
        .enumerate()
        .filter(|(_, line)| !line.iter().all(u8::is_ascii_whitespace))
        .map(|(i, line)| decode(line).map_err(|e| prefix(i + 1, e)))
        .collect()
}

pub fn write_nbest_batch<'a>(docs: impl IntoIterator<Item = &'a SegmentedNBest>) -> Vec<u8> {
    let mut out = Vec::new();
    for doc in docs {
        out.extend(write_nbest_file(doc));
        out.push(b'\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_document_round_trips() {
        let src = br#"{"utterance_id":"u1","segments":[{"start_s":null,"end_s":null,"hypotheses":[{"rank":1,"text":"hello","score":null}]}]}"#;
        let doc = parse_nbest_file(src).unwrap();
        assert_eq!(doc.utterance_id, "u1");
        assert_eq!(doc.segments[0].hypotheses[0].text, "hello");
        assert_eq!(write_nbest_file(&doc), src.to_vec());
    }

    #[test]
    fn rank_gap() {
        let src = br#"{"utterance_id":"u","segments":[{"start_s":null,"end_s":null,"hypotheses":[{"rank":1,"text":"a","score":null},{"rank":3,"text":"b","score":null}]}]}"#;
        assert_eq!(
            parse_nbest_file(src),
            Err(NBestError::RankGap {
                path: "segments[0].hypotheses".into(),
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn malformed_reports_path() {
        let src = br#"{"utterance_id":"u","segments":[{"start_s":null,"end_s":null,"hypotheses":[{"rank":"one","text":"a","score":null}]}]}"#;
        match parse_nbest_file(src) {
            Err(NBestError::MalformedDocument { path, .. }) => assert_eq!(path, "segments[0].hypotheses[0].rank"),
            other => panic!("unexpected {other:?}"),
        }
        let src = br#"{"utterance_id":"u","segments":[{"start_s":null,"end_s":null,"hypotheses":[{"rank":1,"text":"a\nb","score":null}]}]}"#;
        assert!(matches!(parse_nbest_file(src), Err(NBestError::MalformedDocument { .. })));
        assert!(matches!(parse_nbest_file(b"{}"), Err(NBestError::MalformedDocument { .. })));
    }

    #[test]
    fn optional_fields_may_be_missing() {
        let src = br#"{"utterance_id":"u","segments":[{"hypotheses":[{"rank":1,"text":"a"}]}]}"#;
        let doc = parse_nbest_file(src).unwrap();
        assert_eq!(doc.segments[0].start_s, None);
        assert_eq!(doc.segments[0].hypotheses[0].score, None);
    }

    #[test]
    fn batch_line_numbers() {
        let good = r#"{"utterance_id":"u","segments":[]}"#;
        let bad = r#"{"utterance_id":"v","segments":[{"hypotheses":[{"rank":2,"text":"a"}]}]}"#;
        let src = format!("{good}\n\n{bad}\n");
        match parse_nbest_batch(src.as_bytes()) {
            Err(NBestError::RankGap { path, .. }) => assert!(path.starts_with("line 3:"), "{path}"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(parse_nbest_batch(format!("{good}\n{good}\n").as_bytes()).unwrap().len(), 2);
    }

    fn document() -> impl Strategy<Value = SegmentedNBest> {
        let segment = (
            proptest::option::of(0.0f64..100.0),
            proptest::collection::vec(("[ -~]{0,12}", proptest::option::of(-50.0f64..0.0)), 1..5),
        )
            .prop_map(|(start, hyps)| {
                let mut scores: Vec<Option<f64>> = hyps.iter().map(|h| h.1).collect();
                // Keep present scores non-increasing with rank.
                let mut floor = f64::INFINITY;
                for s in scores.iter_mut().flatten() {
                    *s = s.min(floor);
                    floor = *s;
                }
                Segment {
                    start_s: start,
                    end_s: start.map(|s| s + 1.5),
                    hypotheses: hyps
                        .into_iter()
                        .zip(scores)
                        .enumerate()
                        .map(|(i, ((text, _), score))| Hypothesis {
                            rank: i as u32 + 1,
                            text,
                            score,
                        })
                        .collect(),
                }
            });
        ("[a-z0-9_]{1,8}", proptest::collection::vec(segment, 0..4))
            .prop_map(|(utterance_id, segments)| SegmentedNBest { utterance_id, segments })
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(doc in document()) {
            let bytes = write_nbest_file(&doc);
            let back = parse_nbest_file(&bytes).unwrap();
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(write_nbest_file(&back), bytes);
        }
    }
}
