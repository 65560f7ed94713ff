//! Post-processing and evaluation toolkit for two-stage ASR with generative
//! error correction.
//!
//! The pipeline consumes N-best lists from an external recognizer, picks a
//! small diverse subset of hypotheses, asks a correction model for the final
//! transcription, and scores it against annotated references.

pub mod augment;
pub mod ger;
pub mod harness;
pub mod metrics;
pub mod nbest;
pub mod remote;
pub mod transcript;
