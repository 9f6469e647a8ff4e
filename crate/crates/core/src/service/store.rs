//! Run directories on disk: manifest, per-paper machine records and the verdict log.

use std::collections::{BTreeMap, HashSet};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::RunConfig;
use super::pipeline::PaperFailure;
use crate::classify::{Classification, Severity};
use crate::parse::ParsedReference;
use crate::report::{
    aggregate_corpus, effective_verdicts, render_report, CitationKey, CitationRecord, PaperReport, ReportError,
    ReportFormat, ReportView, Verdict,
};
use crate::sources::CandidateMatch;

pub const RUN_MANIFEST: &str = "run.json";
pub const VERDICT_LOG: &str = "verdicts.jsonl";

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown run `{0}`")]
    UnknownRun(String),
    #[error("unknown citation `{0}`")]
    UnknownCitation(String),
    #[error("run `{0}` disappeared from disk")]
    StaleRun(String),
    #[error("unknown paper `{0}`")]
    UnknownPaper(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("corrupt run data in {path}: {detail}")]
    Corrupt { path: PathBuf, detail: String },
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("run store io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    pub corpus_id: String,
    pub created_at: DateTime<Utc>,
    pub papers: Vec<String>,
    pub failures: Vec<PaperFailure>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub corpus_id: String,
    pub created_at: DateTime<Utc>,
    pub paper_count: usize,
    pub failure_count: usize,
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ServiceError> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| ServiceError::Corrupt { path: path.to_owned(), detail: e.to_string() })
}

/// Reads a verdict log. Blank lines are skipped; anything unparsable is an error.
pub fn read_verdict_log(path: &Path) -> Result<Vec<Verdict>, ServiceError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| ServiceError::Corrupt { path: path.to_owned(), detail: format!("line {}: {e}", i + 1) })
        })
        .collect()
}

/// Effective verdict per citation, rebuilt from the log alone.
pub fn replay_verdict_log(path: &Path) -> Result<BTreeMap<CitationKey, Verdict>, ServiceError> {
    Ok(effective_verdicts(&read_verdict_log(path)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriageStatus {
    Pending,
    Decided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusFilter {
    #[default]
    Pending,
    Decided,
    All,
}

impl FromStr for StatusFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pending" => Ok(Self::Pending),
            "decided" => Ok(Self::Decided),
            "all" => Ok(Self::All),
            _ => Err(format!("unknown status `{s}` (pending, decided, all)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriageFilter {
    pub severity: Option<Severity>,
    pub paper: Option<String>,
    pub status: StatusFilter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvidence {
    #[serde(flatten)]
    pub candidate: CandidateMatch,
    pub links: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriageItem {
    /// `paper:index`
    pub key: String,
    pub citation_key: CitationKey,
    pub raw_text: String,
    pub parsed: ParsedReference,
    pub classification: Classification,
    pub candidates: Vec<CandidateEvidence>,
    pub status: TriageStatus,
    pub effective_severity: Severity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

impl TriageItem {
    fn from_record(c: &CitationRecord) -> Self {
        let key = c.key();
        TriageItem {
            key: key.to_string(),
            citation_key: key,
            raw_text: c.entry.raw_text.clone(),
            parsed: c.parsed.clone(),
            classification: c.classification.clone(),
            candidates: c
                .candidates
                .iter()
                .map(|m| CandidateEvidence { links: m.record.evidence_links(), candidate: m.clone() })
                .collect(),
            status: if c.verdict.is_some() { TriageStatus::Decided } else { TriageStatus::Pending },
            effective_severity: c.effective_severity(),
            verdict: c.verdict.clone(),
        }
    }
}

/// What a verdict submission changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictAck {
    pub citation_key: CitationKey,
    pub machine_severity: Severity,
    pub effective_severity: Severity,
    pub log_entries: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scope", content = "paper")]
pub enum ReportScope {
    Corpus,
    Papers,
    Paper(String),
}

impl FromStr for ReportScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corpus" => Ok(Self::Corpus),
            "papers" => Ok(Self::Papers),
            _ => match s.strip_prefix("paper:") {
                Some(id) if !id.is_empty() => Ok(Self::Paper(id.to_owned())),
                _ => Err(format!("unknown scope `{s}` (corpus, papers, paper:<id>)")),
            },
        }
    }
}

/// A directory of runs. Verdict appends are serialized through one lock.
pub struct RunStore {
    root: PathBuf,
    append_lock: Mutex<()>,
    seen: Mutex<HashSet<String>>,
}

impl RunStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into(), append_lock: Mutex::new(()), seen: Mutex::default() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn run_dir(&self, run_id: &str) -> PathBuf {
        self.root.join(run_id)
    }

    fn valid_id(run_id: &str) -> bool {
        !run_id.is_empty() && !run_id.starts_with('.') && !run_id.contains(['/', '\\'])
    }

    fn check_run(&self, run_id: &str) -> Result<PathBuf, ServiceError> {
        let dir = self.run_dir(run_id);
        if Self::valid_id(run_id) && dir.join(RUN_MANIFEST).is_file() {
            self.seen.lock().insert(run_id.to_owned());
            Ok(dir)
        } else if self.seen.lock().contains(run_id) {
            Err(ServiceError::StaleRun(run_id.to_owned()))
        } else {
            Err(ServiceError::UnknownRun(run_id.to_owned()))
        }
    }

    pub fn list_runs(&self) -> Result<Vec<RunSummary>, ServiceError> {
        let mut out = Vec::new();
        let entries = match std::fs::read_dir(&self.root) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e.into()),
        };
        for e in entries {
            let path = e?.path().join(RUN_MANIFEST);
            if path.is_file() {
                let m: RunManifest = read_json(&path)?;
                out.push(RunSummary {
                    run_id: m.run_id,
                    corpus_id: m.corpus_id,
                    created_at: m.created_at,
                    paper_count: m.papers.len(),
                    failure_count: m.failures.len(),
                });
            }
        }
        out.sort_by(|a, b| a.run_id.cmp(&b.run_id));
        Ok(out)
    }

    pub fn manifest(&self, run_id: &str) -> Result<RunManifest, ServiceError> {
        let dir = self.check_run(run_id)?;
        read_json(&dir.join(RUN_MANIFEST))
    }

    pub fn verdicts(&self, run_id: &str) -> Result<Vec<Verdict>, ServiceError> {
        let dir = self.check_run(run_id)?;
        read_verdict_log(&dir.join(VERDICT_LOG))
    }

    fn machine_report(&self, dir: &Path, paper_id: &str) -> Result<PaperReport, ServiceError> {
        let path = dir.join("papers").join(format!("{paper_id}.json"));
        if !path.is_file() {
            return Err(ServiceError::UnknownPaper(paper_id.to_owned()));
        }
        read_json(&path)
    }

    /// Paper reports with the current effective verdicts applied, sorted by paper id.
    pub fn reports(&self, run_id: &str) -> Result<Vec<PaperReport>, ServiceError> {
        let m = self.manifest(run_id)?;
        let dir = self.run_dir(run_id);
        let verdicts = self.verdicts(run_id)?;
        let mut out = Vec::with_capacity(m.papers.len());
        for p in &m.papers {
            let machine = self.machine_report(&dir, p)?;
            out.push(machine.with_verdicts(&verdicts)?);
        }
        out.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        Ok(out)
    }

    pub fn get_report(&self, run_id: &str, scope: &ReportScope, format: ReportFormat) -> Result<Vec<u8>, ServiceError> {
        let reports = self.reports(run_id)?;
        Ok(match scope {
            ReportScope::Corpus => {
                let m = self.manifest(run_id)?;
                render_report(ReportView::Corpus(&aggregate_corpus(&reports, &m.corpus_id)?), format)
            }
            ReportScope::Papers => render_report(ReportView::Papers(&reports), format),
            ReportScope::Paper(id) => {
                let r = reports.iter().find(|r| &r.paper_id == id).ok_or_else(|| ServiceError::UnknownPaper(id.clone()))?;
                render_report(ReportView::Paper(r), format)
            }
        })
    }

    /// Flagged citations, most severe first, then by paper and index.
    pub fn list_triage(&self, run_id: &str, filter: &TriageFilter) -> Result<Vec<TriageItem>, ServiceError> {
        let mut items: Vec<TriageItem> = self
            .reports(run_id)?
            .iter()
            .flat_map(|r| r.citations.iter())
            .filter(|c| c.classification.needs_triage)
            .map(TriageItem::from_record)
            .filter(|i| match filter.status {
                StatusFilter::Pending => i.status == TriageStatus::Pending,
                StatusFilter::Decided => i.status == TriageStatus::Decided,
                StatusFilter::All => true,
            })
            .filter(|i| filter.severity.is_none_or(|s| i.classification.severity == s))
            .filter(|i| filter.paper.as_ref().is_none_or(|p| &i.citation_key.paper_id == p))
            .collect();
        items.sort_by(|a, b| {
            b.classification
                .severity
                .cmp(&a.classification.severity)
                .then_with(|| a.citation_key.cmp(&b.citation_key))
        });
        Ok(items)
    }

    pub fn citation(&self, run_id: &str, key: &CitationKey) -> Result<TriageItem, ServiceError> {
        let reports = self.reports(run_id)?;
        reports
            .iter()
            .find(|r| r.paper_id == key.paper_id)
            .and_then(|r| r.citation(key.index))
            .map(TriageItem::from_record)
            .ok_or_else(|| ServiceError::UnknownCitation(key.to_string()))
    }

    /// Appends a verdict to the run's log. The log is never rewritten.
    pub fn record_verdict(&self, run_id: &str, verdict: Verdict) -> Result<VerdictAck, ServiceError> {
        let dir = self.check_run(run_id)?;
        let key = &verdict.citation_key;
        let machine = match self.machine_report(&dir, &key.paper_id) {
            Ok(r) => r,
            Err(ServiceError::UnknownPaper(_)) => return Err(ServiceError::UnknownCitation(key.to_string())),
            Err(e) => return Err(e),
        };
        let record = machine.citation(key.index).ok_or_else(|| ServiceError::UnknownCitation(key.to_string()))?;
        let machine_severity = record.classification.severity;

        let mut line = serde_json::to_string(&verdict).map_err(std::io::Error::other)?;
        line.push('\n');
        let log_path = dir.join(VERDICT_LOG);
        let _guard = self.append_lock.lock();
        if !dir.join(RUN_MANIFEST).is_file() {
            return Err(ServiceError::StaleRun(run_id.to_owned()));
        }
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(&log_path)?;
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        let log = read_verdict_log(&log_path)?;
        let effective = effective_verdicts(&log);
        let effective_severity = effective.get(key).map_or(machine_severity, |v| v.decided_severity);
        Ok(VerdictAck { citation_key: key.clone(), machine_severity, effective_severity, log_entries: log.len() })
    }
}
