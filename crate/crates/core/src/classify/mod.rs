//! Candidate scoring and the citation severity ladder.

mod authors;
mod identifiers;
mod similarity;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::parse::{LlmUrlMarker, ParseConfidence, ParsedReference};
use crate::sources::{CandidateMatch, MetadataRecord};
use crate::text::tokens;

pub use authors::{
    author_score, canonical_name_part, compare_authors, AuthorDiff, AuthorDiffKind, IgnoredDiscrepancy,
};
pub use identifiers::{check_identifiers, IdentifierFinding, IdentifierStatus, Lookup};
pub use similarity::{title_similarity, token_similarity, SHORT_TITLE_TOKENS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Ok = 0,
    MinorError = 1,
    RephrasedTitle = 2,
    Mysterious = 3,
}

impl Severity {
    pub const ALL: [Severity; 4] = [Severity::Ok, Severity::MinorError, Severity::RephrasedTitle, Severity::Mysterious];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Ok => "ok",
            Severity::MinorError => "minor_error",
            Severity::RephrasedTitle => "rephrased_title",
            Severity::Mysterious => "mysterious",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Severity::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown severity `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Minimum title score for a minor error.
    pub minor: f64,
    /// Minimum title score for a rephrased title.
    pub rephrase: f64,
    /// Family names within this many edits are the same person...
    pub name_edit_max: usize,
    /// ...provided the edits are at most this share of the name length.
    pub name_edit_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { minor: 0.90, rephrase: 0.60, name_edit_max: 2, name_edit_ratio: 0.30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub severity: Severity,
    pub matched: Option<CandidateMatch>,
    pub author_diff: AuthorDiff,
    pub identifier_finding: IdentifierFinding,
    pub llm_markers: Vec<LlmUrlMarker>,
    pub needs_triage: bool,
    pub rationale: String,
}

/// Stable rationale phrases, shown verbatim in the triage UI.
pub mod rationale {
    pub const EXACT: &str = "exact title match at cited location";
    pub const EXACT_UNCONFIRMED: &str = "exact title match; cited location not confirmed";
    pub const MINOR: &str = "near-identical title at cited location";
    pub const MINOR_UNCONFIRMED: &str = "near-identical title; cited location not confirmed";
    pub const REPHRASED: &str = "rephrased (unconfirmed): similar title at cited location";
    pub const NO_CANDIDATES: &str = "no candidates from any source";
    pub const NOT_SIMILAR: &str = "no candidate with a similar enough title";
    pub const UNVERIFIED: &str = "unverified: every source failed";
    pub const NO_TITLE: &str = "no title could be parsed";
    pub const LOW_CONFIDENCE: &str = "low parse confidence";
    pub const LLM_MARKER: &str = "LLM URL marker present";
    pub const IDENTIFIER_PROBLEM: &str = "identifier problem";
}

/// Scores one record against a citation.
pub fn score_candidate(reference: &ParsedReference, record: &MetadataRecord, th: &Thresholds) -> CandidateMatch {
    let title_score = reference.title.as_deref().map_or(0.0, |t| title_similarity(t, &record.title));
    let author_score = author_score(&reference.authors, reference.et_al, &record.authors, th);
    CandidateMatch { record: record.clone(), title_score, author_score, location_confirmed: location_confirmed(reference, record) }
}

/// The citation's DOI or arXiv ID matches, or its year agrees and its venue or first page matches.
pub fn location_confirmed(reference: &ParsedReference, record: &MetadataRecord) -> bool {
    if let (Some(a), Some(b)) = (&reference.identifiers.doi, &record.doi) {
        if a.eq_ignore_ascii_case(b) {
            return true;
        }
    }
    if let (Some(a), Some(b)) = (&reference.identifiers.arxiv_id, &record.arxiv_id) {
        if a == b {
            return true;
        }
    }
    match (reference.year, record.year) {
        (Some(a), Some(b)) if a == b => {}
        _ => return false,
    }
    let venue = matches!((&reference.venue, &record.venue), (Some(a), Some(b)) if venues_match(a, b));
    let pages = matches!((&reference.pages, &record.pages), (Some(a), Some(b)) if first_page(a).is_some() && first_page(a) == first_page(b));
    venue || pages
}

fn first_page(p: &str) -> Option<&str> {
    let t = p.trim().split(|c: char| !c.is_alphanumeric()).next()?;
    (!t.is_empty()).then_some(t)
}

const VENUE_STOPWORDS: &[&str] = &[
    "proc", "proceedings", "of", "the", "in", "on", "and", "for", "international", "int", "intl", "conference",
    "conf", "symposium", "symp", "workshop", "annual", "acm", "ieee", "journal", "j", "transactions", "trans",
    "on", "a", "an", "th", "st", "nd", "rd",
];

fn venue_tokens(v: &str) -> Vec<String> {
    tokens(v)
        .into_iter()
        .filter(|t| !VENUE_STOPWORDS.contains(&t.as_str()) && !t.chars().all(|c| c.is_ascii_digit()))
        .collect()
}

fn venue_token_match(a: &str, b: &str) -> bool {
    a == b || (a.len() >= 4 && b.starts_with(a)) || (b.len() >= 4 && a.starts_with(b))
}

/// Abbreviation-tolerant venue comparison: most content words of the shorter venue
/// appear (possibly abbreviated) in the longer, or one is the other's acronym.
pub fn venues_match(a: &str, b: &str) -> bool {
    let ta = venue_tokens(a);
    let tb = venue_tokens(b);
    if ta.is_empty() || tb.is_empty() {
        return false;
    }
    let (short, long) = if ta.len() <= tb.len() { (&ta, &tb) } else { (&tb, &ta) };
    let hits = short.iter().filter(|s| long.iter().any(|l| venue_token_match(s, l))).count();
    if hits * 5 >= short.len() * 3 {
        return true;
    }
    // Acronyms keep initials of words like "international" and "symposium".
    const FUNCTION_WORDS: &[&str] = &["of", "the", "in", "on", "and", "for", "a", "an", "proc", "proceedings"];
    let acronym = |v: &str| {
        tokens(v)
            .iter()
            .filter(|t| !FUNCTION_WORDS.contains(&t.as_str()) && !t.chars().all(|c| c.is_ascii_digit()))
            .filter_map(|t| t.chars().next())
            .collect::<String>()
    };
    let acr_a = acronym(a);
    let acr_b = acronym(b);
    (ta.len() == 1 && acr_b.len() >= 2 && ta[0] == acr_b) || (tb.len() == 1 && acr_a.len() >= 2 && tb[0] == acr_a)
}

/// Deterministic total order over candidates: score, then confirmed location, then
/// source priority, then native id.
fn candidate_order(a: &CandidateMatch, b: &CandidateMatch) -> Ordering {
    b.title_score
        .total_cmp(&a.title_score)
        .then_with(|| b.location_confirmed.cmp(&a.location_confirmed))
        .then_with(|| a.record.source.priority().cmp(&b.record.source.priority()))
        .then_with(|| a.record.source_native_id.cmp(&b.record.source_native_id))
        .then_with(|| a.record.title.cmp(&b.record.title))
}

/// Highest-ranked candidate satisfying `accept`.
fn best_where<'a>(candidates: &'a [CandidateMatch], accept: impl Fn(&CandidateMatch) -> bool) -> Option<&'a CandidateMatch> {
    candidates.iter().filter(|c| accept(c)).min_by(|a, b| candidate_order(a, b))
}

/// Places a citation on the severity ladder.
///
/// An exact title is ok and a score of at least `minor` is a minor error, both accepted
/// with or without a confirmed location (a mismatch is noted in the rationale). A score
/// of at least `rephrase` is a rephrased title only at a confirmed location. Anything
/// else is mysterious. Rephrased and mysterious citations always need triage.
pub fn classify_citation(
    reference: &ParsedReference,
    candidates: &[CandidateMatch],
    identifier_finding: IdentifierFinding,
    th: &Thresholds,
) -> Classification {
    const EXACT: f64 = 1.0 - 1e-12;
    let mut notes: Vec<String> = Vec::new();

    let (severity, matched) = if reference.title.is_none() {
        notes.push(rationale::NO_TITLE.to_owned());
        (Severity::Mysterious, None)
    } else if let Some(c) = best_where(candidates, |c| c.title_score >= EXACT) {
        notes.push(if c.location_confirmed { rationale::EXACT } else { rationale::EXACT_UNCONFIRMED }.to_owned());
        (Severity::Ok, Some(c.clone()))
    } else if let Some(c) = best_where(candidates, |c| c.title_score >= th.minor) {
        let phrase = if c.location_confirmed { rationale::MINOR } else { rationale::MINOR_UNCONFIRMED };
        notes.push(format!("{phrase} (score {:.3}, {})", c.title_score, c.record.source));
        (Severity::MinorError, Some(c.clone()))
    } else if let Some(c) = best_where(candidates, |c| c.title_score >= th.rephrase && c.location_confirmed) {
        notes.push(format!("{} (score {:.3}, {})", rationale::REPHRASED, c.title_score, c.record.source));
        (Severity::RephrasedTitle, Some(c.clone()))
    } else if let Some(best) = best_where(candidates, |_| true) {
        notes.push(format!("{} (best score {:.3}, {})", rationale::NOT_SIMILAR, best.title_score, best.record.source));
        (Severity::Mysterious, None)
    } else {
        notes.push(rationale::NO_CANDIDATES.to_owned());
        (Severity::Mysterious, None)
    };

    let author_diff = match &matched {
        Some(m) if severity < Severity::Mysterious => {
            compare_authors(&reference.authors, reference.et_al, &m.record.authors, th)
        }
        _ => AuthorDiff::not_applicable(),
    };

    finish(reference, severity, matched, author_diff, identifier_finding, notes)
}

/// Classification for a citation that could not be checked because every source failed.
pub fn classify_unverified(reference: &ParsedReference, identifier_finding: IdentifierFinding) -> Classification {
    finish(
        reference,
        Severity::Mysterious,
        None,
        AuthorDiff::not_applicable(),
        identifier_finding,
        vec![rationale::UNVERIFIED.to_owned()],
    )
}

fn finish(
    reference: &ParsedReference,
    severity: Severity,
    matched: Option<CandidateMatch>,
    author_diff: AuthorDiff,
    identifier_finding: IdentifierFinding,
    mut notes: Vec<String>,
) -> Classification {
    let low_confidence = reference.parse_confidence == ParseConfidence::Low;
    if low_confidence {
        notes.push(rationale::LOW_CONFIDENCE.to_owned());
    }
    if !reference.llm_markers.is_empty() {
        notes.push(rationale::LLM_MARKER.to_owned());
    }
    if identifier_finding.has_error() {
        notes.push(format!("{}: {}", rationale::IDENTIFIER_PROBLEM, identifier_finding.summary()));
    }
    let needs_triage = severity >= Severity::RephrasedTitle || low_confidence || !reference.llm_markers.is_empty();
    Classification {
        severity,
        matched,
        author_diff,
        identifier_finding,
        llm_markers: reference.llm_markers.clone(),
        needs_triage,
        rationale: notes.join("; "),
    }
}
