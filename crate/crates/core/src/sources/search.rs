//! Multi-source candidate search for one parsed reference.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CandidateMatch, MetadataRecord, SourceClient, SourceError, SourceId};
use crate::classify::{score_candidate, Lookup, Thresholds};
use crate::parse::{is_valid_doi, ParsedReference};
use crate::text::normalize_for_match;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchPlan {
    /// Title-search sources, queried in this order.
    pub title_sources: Vec<SourceId>,
    /// Query Google Books and OSTI when the venue suggests them or nothing else matched.
    pub fallbacks: bool,
    /// Stop once an exact title at a confirmed location has been found.
    pub early_exit: bool,
}

impl Default for SearchPlan {
    fn default() -> Self {
        Self { title_sources: vec![SourceId::Dblp, SourceId::Openalex, SourceId::Crossref], fallbacks: true, early_exit: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    Doi,
    Arxiv,
    Title,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    /// At least one record came back with a similar enough title.
    Hit,
    NoHit,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceTrace {
    pub source: SourceId,
    pub mode: QueryMode,
    pub status: TraceStatus,
    pub records: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Outcome of resolving a DOI or arXiv ID.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "status", content = "record", rename_all = "snake_case")]
pub enum IdLookup {
    #[default]
    NotAttempted,
    Found(Box<MetadataRecord>),
    NotFound,
    Failed,
}

impl IdLookup {
    pub fn as_lookup(&self) -> Lookup<'_> {
        match self {
            IdLookup::Found(r) => Lookup::Found(r),
            IdLookup::NotFound | IdLookup::NotAttempted => Lookup::NotFound,
            IdLookup::Failed => Lookup::Failed,
        }
    }

    pub fn record(&self) -> Option<&MetadataRecord> {
        match self {
            IdLookup::Found(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Scored, de-duplicated candidates in the order they were found.
    pub candidates: Vec<CandidateMatch>,
    pub trace: Vec<SourceTrace>,
    pub doi_lookup: IdLookup,
    pub arxiv_lookup: IdLookup,
}

impl SearchOutcome {
    /// True when queries were attempted and every one of them errored.
    pub fn all_failed(&self) -> bool {
        !self.trace.is_empty() && self.trace.iter().all(|t| t.status == TraceStatus::Error)
    }

    fn has_similar(&self, th: &Thresholds) -> bool {
        self.candidates.iter().any(|c| c.title_score >= th.rephrase)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("every source failed; last error: {0}")]
    AllSourcesFailed(SourceError),
}

struct Collector<'a> {
    reference: &'a ParsedReference,
    th: &'a Thresholds,
    seen: HashSet<String>,
    out: SearchOutcome,
    last_error: Option<SourceError>,
}

impl Collector<'_> {
    fn dedup_key(r: &MetadataRecord) -> String {
        match &r.doi {
            Some(d) => format!("doi:{}", d.to_ascii_lowercase()),
            None => format!("t:{}|{}", normalize_for_match(&r.title), r.year.map_or(String::new(), |y| y.to_string())),
        }
    }

    fn add(&mut self, source: SourceId, mode: QueryMode, result: Result<Vec<MetadataRecord>, SourceError>) {
        let (status, records, error) = match result {
            Ok(records) => {
                let n = records.len();
                let mut hit = false;
                for r in records {
                    let c = score_candidate(self.reference, &r, self.th);
                    hit |= c.title_score >= self.th.rephrase;
                    if self.seen.insert(Self::dedup_key(&r)) {
                        self.out.candidates.push(c);
                    }
                }
                (if hit { TraceStatus::Hit } else { TraceStatus::NoHit }, n, None)
            }
            Err(e) => {
                let msg = e.to_string();
                self.last_error = Some(e);
                (TraceStatus::Error, 0, Some(msg))
            }
        };
        self.out.trace.push(SourceTrace { source, mode, status, records, error });
    }

    fn settled(&self) -> bool {
        self.out.candidates.iter().any(|c| c.title_score >= 1.0 - 1e-12 && c.location_confirmed)
    }
}

fn looks_like_book(r: &ParsedReference) -> bool {
    matches!(r.format_id, Some(5) | Some(10))
        || r.venue.as_deref().is_some_and(|v| {
            let v = v.to_lowercase();
            ["press", "publisher", "springer", "wiley", "addison", "o'reilly", "prentice", "ed."].iter().any(|k| v.contains(k))
        })
}

fn looks_like_report(r: &ParsedReference) -> bool {
    matches!(r.format_id, Some(8))
        || r.venue.as_deref().is_some_and(|v| {
            let v = v.to_lowercase();
            ["national laboratory", "national lab", "osti", "doe", "tech. rep", "technical report"].iter().any(|k| v.contains(k))
        })
}

/// Queries identifier lookups, then title searches, then fallbacks, collecting scored
/// candidates. Fails only when every attempted query failed.
pub fn search_all(
    client: &SourceClient,
    reference: &ParsedReference,
    plan: &SearchPlan,
    th: &Thresholds,
) -> Result<SearchOutcome, SearchError> {
    let mut col = Collector { reference, th, seen: HashSet::new(), out: SearchOutcome::default(), last_error: None };
    let ids = &reference.identifiers;

    if let Some(doi) = ids.doi.as_deref().filter(|d| is_valid_doi(d)) {
        let mut failed = 0;
        for source in [SourceId::Crossref, SourceId::Openalex] {
            let res = client.lookup_doi(source, doi);
            match &res {
                Ok(Some(r)) => col.out.doi_lookup = IdLookup::Found(Box::new(r.clone())),
                Ok(None) => {}
                Err(_) => failed += 1,
            }
            col.add(source, QueryMode::Doi, res.map(|o| o.into_iter().collect()));
            if col.out.doi_lookup != IdLookup::NotAttempted {
                break;
            }
        }
        if col.out.doi_lookup == IdLookup::NotAttempted {
            col.out.doi_lookup = if failed == 2 { IdLookup::Failed } else { IdLookup::NotFound };
        }
    }

    if let Some(id) = &ids.arxiv_id {
        let res = client.lookup_arxiv(id);
        col.out.arxiv_lookup = match &res {
            Ok(Some(r)) => IdLookup::Found(Box::new(r.clone())),
            Ok(None) => IdLookup::NotFound,
            Err(_) => IdLookup::Failed,
        };
        col.add(SourceId::Arxiv, QueryMode::Arxiv, res.map(|o| o.into_iter().collect()));
    }

    if let Some(title) = &reference.title {
        for &source in &plan.title_sources {
            if plan.early_exit && col.settled() {
                break;
            }
            col.add(source, QueryMode::Title, client.search_title(source, title));
        }
        if plan.fallbacks {
            for (source, suggested) in
                [(SourceId::GoogleBooks, looks_like_book(reference)), (SourceId::Osti, looks_like_report(reference))]
            {
                if plan.early_exit && col.settled() {
                    break;
                }
                if suggested || !col.out.has_similar(th) {
                    col.add(source, QueryMode::Title, client.search_title(source, title));
                }
            }
        }
    }

    if col.out.all_failed() {
        if let Some(e) = col.last_error {
            return Err(SearchError::AllSourcesFailed(e));
        }
    }
    Ok(col.out)
}
