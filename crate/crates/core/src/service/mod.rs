//! Pipeline orchestration, run directories, the triage queue and its HTTP API.

pub mod api;
mod config;
mod pipeline;
mod store;

pub use config::{ConfigError, RunConfig, ENV_CACHE_DIR, ENV_CONTACT};
pub use pipeline::{
    build_verifier, collect_inputs, load_document, paper_id_for, run_pipeline, run_pipeline_with, write_rendered,
    PaperFailure, PaperRun, PipelineError, RunOutput, Verification, Verifier,
};
pub use store::{
    read_verdict_log, replay_verdict_log, CandidateEvidence, ReportScope, RunManifest, RunStore, RunSummary,
    ServiceError, StatusFilter, TriageFilter, TriageItem, TriageStatus, VerdictAck, RUN_MANIFEST, VERDICT_LOG,
};
