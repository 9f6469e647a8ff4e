//! Bibliography extraction, reference parsing, multi-source verification and triage.

pub mod classify;
pub mod extract;
pub mod parse;
pub mod report;
pub mod service;
pub mod sources;
pub mod text;
