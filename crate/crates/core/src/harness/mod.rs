//! Config, manifest ingestion and the end-to-end run loop.

pub mod config;
pub mod manifest;
pub mod pipeline;

pub use config::{
    AsrSection, AsrSourceKind, BackendKind, ConfigError, GerSection, MetricsSection, PipelineConfig, PipelineSection,
    ReportFormat,
};
pub use manifest::{ingest_manifest, parse_manifest, Manifest, ManifestEntry, ManifestError, ManifestRow};
pub use pipeline::{
    build_backend, build_scorers, emit_report, fetch_nbest, run_pipeline, AsrSource, Failure, FetchError, Pipeline,
    PipelineOutput, RunStatus, Stage,
};
