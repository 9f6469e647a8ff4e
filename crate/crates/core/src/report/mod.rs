//! Per-paper and per-corpus rollups with human verdicts applied, rendering and anonymization.

mod anonymize;
mod render;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{AuthorDiffKind, Classification, Severity};
use crate::extract::BibEntry;
use crate::parse::ParsedReference;
use crate::sources::CandidateMatch;

pub use anonymize::{anonymize, anonymize_id, Anonymize, AnonymizationMap};
pub use render::{render_report, ReportFormat, ReportView};

/// Bumped whenever the JSON layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("verdict for {0} does not match any citation of this paper")]
    VerdictMismatch(CitationKey),
    #[error("citation {0} does not belong to paper {1}")]
    ForeignCitation(CitationKey, String),
    #[error("cannot aggregate an empty list of reports")]
    NoReports,
    #[error("anonymization salt must not be empty")]
    EmptySalt,
}

/// (paper id, entry index); written `paper:index`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CitationKey {
    pub paper_id: String,
    pub index: u32,
}

impl CitationKey {
    pub fn new(paper_id: impl Into<String>, index: u32) -> Self {
        Self { paper_id: paper_id.into(), index }
    }

    pub fn of(entry: &BibEntry) -> Self {
        Self::new(entry.paper_id.clone(), entry.index)
    }
}

impl fmt::Display for CitationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.paper_id, self.index)
    }
}

impl FromStr for CitationKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (paper, idx) = s.rsplit_once(':').ok_or_else(|| format!("citation key `{s}` is not paper:index"))?;
        let index = idx.parse().map_err(|_| format!("citation key `{s}` has a bad index"))?;
        if paper.is_empty() {
            return Err(format!("citation key `{s}` has an empty paper id"));
        }
        Ok(Self::new(paper, index))
    }
}

/// A reviewer's decision about one citation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub citation_key: CitationKey,
    pub decided_severity: Severity,
    pub reviewer: String,
    #[serde(default)]
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_url: Option<String>,
    pub decided_at: DateTime<Utc>,
}

/// Latest verdict per citation key. Ties on `decided_at` go to the later entry in `log`.
pub fn effective_verdicts<'a>(log: impl IntoIterator<Item = &'a Verdict>) -> BTreeMap<CitationKey, Verdict> {
    let mut out: BTreeMap<CitationKey, Verdict> = BTreeMap::new();
    for v in log {
        match out.get(&v.citation_key) {
            Some(prev) if prev.decided_at > v.decided_at => {}
            _ => {
                out.insert(v.citation_key.clone(), v.clone());
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationRecord {
    pub entry: BibEntry,
    pub parsed: ParsedReference,
    pub classification: Classification,
    /// Scored candidates the classification was made from (reviewer evidence).
    #[serde(default)]
    pub candidates: Vec<CandidateMatch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

impl CitationRecord {
    pub fn key(&self) -> CitationKey {
        CitationKey::of(&self.entry)
    }

    pub fn effective_severity(&self) -> Severity {
        self.verdict.as_ref().map_or(self.classification.severity, |v| v.decided_severity)
    }

    /// Author tally bucket; mysterious citations count as incorrect.
    pub fn author_error(&self) -> Option<AuthorErrorKind> {
        if self.effective_severity() == Severity::Mysterious {
            return Some(AuthorErrorKind::Incorrect);
        }
        match self.classification.author_diff.kind {
            AuthorDiffKind::Missing => Some(AuthorErrorKind::Missing),
            AuthorDiffKind::Extra => Some(AuthorErrorKind::Extra),
            AuthorDiffKind::Both => Some(AuthorErrorKind::Both),
            AuthorDiffKind::None | AuthorDiffKind::NotApplicable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthorErrorKind {
    Missing,
    Extra,
    Both,
    Incorrect,
}

impl AuthorErrorKind {
    pub const ALL: [AuthorErrorKind; 4] =
        [AuthorErrorKind::Missing, AuthorErrorKind::Extra, AuthorErrorKind::Both, AuthorErrorKind::Incorrect];
}

fn zeroed<K: Ord + Copy>(keys: &[K]) -> BTreeMap<K, usize> {
    keys.iter().map(|&k| (k, 0)).collect()
}

const ISSUE_SEVERITIES: [Severity; 3] = [Severity::MinorError, Severity::RephrasedTitle, Severity::Mysterious];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperReport {
    pub schema_version: u32,
    pub paper_id: String,
    pub max_severity: Severity,
    /// Effective severity counts; every severity is present.
    pub counts: BTreeMap<Severity, usize>,
    pub author_error_counts: BTreeMap<AuthorErrorKind, usize>,
    pub identifier_error_count: usize,
    pub llm_marker_count: usize,
    pub needs_triage_count: usize,
    pub citations: Vec<CitationRecord>,
}

impl PaperReport {
    fn rollup(paper_id: String, citations: Vec<CitationRecord>) -> Self {
        let mut counts = zeroed(&Severity::ALL);
        let mut author_error_counts = zeroed(&AuthorErrorKind::ALL);
        let mut identifier_error_count = 0;
        let mut llm_marker_count = 0;
        let mut needs_triage_count = 0;
        let mut max_severity = Severity::Ok;
        for c in &citations {
            let sev = c.effective_severity();
            max_severity = max_severity.max(sev);
            *counts.entry(sev).or_default() += 1;
            if let Some(k) = c.author_error() {
                *author_error_counts.entry(k).or_default() += 1;
            }
            identifier_error_count += usize::from(c.classification.identifier_finding.has_error());
            llm_marker_count += usize::from(!c.classification.llm_markers.is_empty());
            needs_triage_count += usize::from(c.classification.needs_triage && c.verdict.is_none());
        }
        Self {
            schema_version: SCHEMA_VERSION,
            paper_id,
            max_severity,
            counts,
            author_error_counts,
            identifier_error_count,
            llm_marker_count,
            needs_triage_count,
            citations,
        }
    }

    /// Re-applies `verdicts` (replacing any already attached) and recomputes every rollup.
    pub fn with_verdicts(&self, verdicts: &[Verdict]) -> Result<PaperReport, ReportError> {
        let mut citations = self.citations.clone();
        for c in &mut citations {
            c.verdict = None;
        }
        build_paper_report(&self.paper_id, citations, verdicts)
    }

    pub fn citation(&self, index: u32) -> Option<&CitationRecord> {
        self.citations.iter().find(|c| c.entry.index == index)
    }
}

/// Rolls one paper's citations up, with the latest verdict per citation overriding
/// the machine severity. Verdicts for other papers are ignored.
pub fn build_paper_report(
    paper_id: &str,
    mut citations: Vec<CitationRecord>,
    verdicts: &[Verdict],
) -> Result<PaperReport, ReportError> {
    if let Some(c) = citations.iter().find(|c| c.entry.paper_id != paper_id) {
        return Err(ReportError::ForeignCitation(c.key(), paper_id.to_owned()));
    }
    let effective = effective_verdicts(verdicts.iter().filter(|v| v.citation_key.paper_id == paper_id));
    let positions: HashMap<u32, usize> = citations.iter().enumerate().map(|(i, c)| (c.entry.index, i)).collect();
    for (key, v) in effective {
        let &i = positions.get(&key.index).ok_or(ReportError::VerdictMismatch(key))?;
        citations[i].verdict = Some(v);
    }
    Ok(PaperReport::rollup(paper_id.to_owned(), citations))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub schema_version: u32,
    pub corpus_id: String,
    pub paper_count: usize,
    pub citation_count: usize,
    /// Papers counted once, at their max severity, for each issue severity.
    pub papers_with_issue_by_severity: BTreeMap<Severity, usize>,
    /// Papers whose max severity is rephrased_title or worse.
    pub papers_with_issue: usize,
    /// `papers_with_issue / paper_count`; minor errors excluded.
    pub fraction_with_issue: f64,
    /// Same, counting minor errors too.
    pub fraction_with_any_issue: f64,
    pub total_erroneous_citations_by_severity: BTreeMap<Severity, usize>,
    pub author_error_totals: BTreeMap<AuthorErrorKind, usize>,
    pub identifier_error_total: usize,
    pub llm_marker_total: usize,
}

/// Folds paper reports into corpus statistics. Order of `reports` does not matter.
pub fn aggregate_corpus(reports: &[PaperReport], corpus_id: &str) -> Result<CorpusStats, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::NoReports);
    }
    let mut by_paper = zeroed(&ISSUE_SEVERITIES);
    let mut by_citation = zeroed(&ISSUE_SEVERITIES);
    let mut author_error_totals = zeroed(&AuthorErrorKind::ALL);
    let mut citation_count = 0;
    let mut identifier_error_total = 0;
    let mut llm_marker_total = 0;
    for r in reports {
        if r.max_severity > Severity::Ok {
            *by_paper.entry(r.max_severity).or_default() += 1;
        }
        for s in ISSUE_SEVERITIES {
            *by_citation.entry(s).or_default() += r.counts.get(&s).copied().unwrap_or(0);
        }
        for (k, n) in &r.author_error_counts {
            *author_error_totals.entry(*k).or_default() += n;
        }
        citation_count += r.citations.len();
        identifier_error_total += r.identifier_error_count;
        llm_marker_total += r.llm_marker_count;
    }
    let papers_with_issue = by_paper[&Severity::RephrasedTitle] + by_paper[&Severity::Mysterious];
    let papers_with_any = papers_with_issue + by_paper[&Severity::MinorError];
    let n = reports.len();
    Ok(CorpusStats {
        schema_version: SCHEMA_VERSION,
        corpus_id: corpus_id.to_owned(),
        paper_count: n,
        citation_count,
        papers_with_issue_by_severity: by_paper,
        papers_with_issue,
        fraction_with_issue: papers_with_issue as f64 / n as f64,
        fraction_with_any_issue: papers_with_any as f64 / n as f64,
        total_erroneous_citations_by_severity: by_citation,
        author_error_totals,
        identifier_error_total,
        llm_marker_total,
    })
}
