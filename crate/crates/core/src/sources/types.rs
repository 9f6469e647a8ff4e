use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::parse::PersonName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceId {
    Arxiv,
    Crossref,
    Dblp,
    GoogleBooks,
    Openalex,
    Osti,
}

impl SourceId {
    pub const ALL: [SourceId; 6] = [
        SourceId::Crossref,
        SourceId::Openalex,
        SourceId::Dblp,
        SourceId::Arxiv,
        SourceId::Osti,
        SourceId::GoogleBooks,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceId::Arxiv => "arxiv",
            SourceId::Crossref => "crossref",
            SourceId::Dblp => "dblp",
            SourceId::GoogleBooks => "google_books",
            SourceId::Openalex => "openalex",
            SourceId::Osti => "osti",
        }
    }

    /// Tie-break rank among equally scored candidates (lower wins).
    pub fn priority(self) -> u8 {
        match self {
            SourceId::Crossref => 0,
            SourceId::Openalex => 1,
            SourceId::Dblp => 2,
            SourceId::Arxiv => 3,
            SourceId::Osti => 4,
            SourceId::GoogleBooks => 5,
        }
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown source `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArxivVersion {
    pub version: u32,
    pub title: String,
    pub authors: Vec<PersonName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataRecord {
    pub title: String,
    pub authors: Vec<PersonName>,
    pub venue: Option<String>,
    pub year: Option<i32>,
    pub pages: Option<String>,
    pub doi: Option<String>,
    pub arxiv_id: Option<String>,
    /// Populated only for arXiv records.
    pub arxiv_versions: Option<Vec<ArxivVersion>>,
    pub source: SourceId,
    pub source_native_id: String,
    pub retrieved_at: DateTime<Utc>,
}

impl MetadataRecord {
    /// Outbound links a reviewer can follow to check this record by hand.
    pub fn evidence_links(&self) -> Vec<String> {
        let mut links = Vec::new();
        if let Some(doi) = &self.doi {
            links.push(format!("https://doi.org/{doi}"));
        }
        if let Some(id) = &self.arxiv_id {
            links.push(format!("https://arxiv.org/abs/{id}"));
        }
        let native = &self.source_native_id;
        match self.source {
            SourceId::Dblp => links.push(format!("https://dblp.org/rec/{native}")),
            SourceId::Openalex => links.push(native.replace("https://openalex.org/", "https://openalex.org/works/")),
            SourceId::GoogleBooks => links.push(format!("https://books.google.com/books?id={native}")),
            SourceId::Osti => links.push(format!("https://www.osti.gov/biblio/{native}")),
            SourceId::Arxiv if self.arxiv_id.is_none() => links.push(format!("https://arxiv.org/abs/{native}")),
            SourceId::Crossref | SourceId::Arxiv => {}
        }
        links
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMatch {
    pub record: MetadataRecord,
    pub title_score: f64,
    pub author_score: f64,
    /// The citation's identifier, or its venue and year with pages, resolve to this record.
    pub location_confirmed: bool,
}
