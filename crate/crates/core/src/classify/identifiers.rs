use serde::{Deserialize, Serialize};

use crate::parse::ParsedReference;
use crate::sources::MetadataRecord;
use crate::text::tokens;

use super::{title_similarity, Thresholds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentifierStatus {
    #[default]
    Absent,
    ValidConsistent,
    ValidInconsistent,
    Unregistered,
    Malformed,
    /// The lookup itself failed, so registration is unknown.
    Unchecked,
}

impl IdentifierStatus {
    pub fn is_error(self) -> bool {
        matches!(self, Self::ValidInconsistent | Self::Unregistered | Self::Malformed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IdentifierFinding {
    pub doi_status: IdentifierStatus,
    pub arxiv_status: IdentifierStatus,
    pub version_note: Option<String>,
}

impl IdentifierFinding {
    pub fn has_error(&self) -> bool {
        self.doi_status.is_error() || self.arxiv_status.is_error()
    }

    pub fn summary(&self) -> String {
        let name = |s: IdentifierStatus| serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        format!("doi {}, arxiv {}", name(self.doi_status), name(self.arxiv_status))
    }
}

/// Result of resolving an identifier.
#[derive(Debug, Clone, Copy)]
pub enum Lookup<'a> {
    Found(&'a MetadataRecord),
    NotFound,
    Failed,
}

impl<'a> From<Option<&'a MetadataRecord>> for Lookup<'a> {
    fn from(o: Option<&'a MetadataRecord>) -> Self {
        o.map_or(Lookup::NotFound, Lookup::Found)
    }
}

fn status(reference: &ParsedReference, present: bool, lookup: Lookup<'_>, th: &Thresholds) -> IdentifierStatus {
    if !present {
        return IdentifierStatus::Absent;
    }
    match lookup {
        Lookup::Failed => IdentifierStatus::Unchecked,
        Lookup::NotFound => IdentifierStatus::Unregistered,
        Lookup::Found(rec) => match &reference.title {
            Some(t) if title_similarity(t, &rec.title) < th.rephrase => IdentifierStatus::ValidInconsistent,
            _ => IdentifierStatus::ValidConsistent,
        },
    }
}

/// Checks the citation's DOI and arXiv ID against what they resolve to.
pub fn check_identifiers(
    reference: &ParsedReference,
    resolved: Lookup<'_>,
    arxiv_record: Lookup<'_>,
    th: &Thresholds,
) -> IdentifierFinding {
    let ids = &reference.identifiers;
    let doi_status = if ids.doi.is_none() && ids.malformed_doi.is_some() {
        IdentifierStatus::Malformed
    } else {
        status(reference, ids.doi.is_some(), resolved, th)
    };
    let arxiv_status = status(reference, ids.arxiv_id.is_some(), arxiv_record, th);
    let version_note = match arxiv_record {
        Lookup::Found(rec) => version_note(reference, rec),
        _ => None,
    };
    IdentifierFinding { doi_status, arxiv_status, version_note }
}

fn family_set(names: &[crate::parse::PersonName]) -> Vec<String> {
    let mut v: Vec<String> = names.iter().map(|n| super::canonical_name_part(&n.family)).collect();
    v.sort();
    v
}

/// Describes title or author drift between earlier arXiv versions and the latest.
fn version_note(reference: &ParsedReference, rec: &MetadataRecord) -> Option<String> {
    let versions = rec.arxiv_versions.as_ref()?;
    let latest = versions.iter().max_by_key(|v| v.version)?;
    let mut notes = Vec::new();
    for v in versions.iter().filter(|v| v.version < latest.version) {
        if tokens(&v.title) != tokens(&latest.title) {
            notes.push(format!("v{} title \"{}\" differs from v{}", v.version, v.title, latest.version));
        }
        if family_set(&v.authors) != family_set(&latest.authors) {
            notes.push(format!("v{} author list differs from v{}", v.version, latest.version));
        }
    }
    if notes.is_empty() {
        return None;
    }
    if let Some(cited) = &reference.title {
        let best = versions
            .iter()
            .max_by(|a, b| title_similarity(cited, &a.title).total_cmp(&title_similarity(cited, &b.title)).then(b.version.cmp(&a.version)));
        if let Some(b) = best.filter(|b| b.version != latest.version) {
            notes.push(format!("cited title matches v{} best", b.version));
        }
    }
    Some(notes.join("; "))
}
