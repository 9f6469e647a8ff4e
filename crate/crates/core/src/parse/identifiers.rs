use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identifiers {
    pub doi: Option<String>,
    /// Every distinct DOI in the entry, primary first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub all_dois: Vec<String>,
    /// A DOI-looking token that failed the syntax check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub malformed_doi: Option<String>,
    pub arxiv_id: Option<String>,
    pub arxiv_version: Option<u32>,
    pub urls: Vec<String>,
}

pub(crate) static DOI_PATTERN: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^10\.\d{4,9}/[-._;()/:<>A-Za-z0-9\[\]]+$").unwrap());
static DOI_SCAN: Lazy<Regex> = Lazy::new(|| Regex::new(r"10\.\d{4,9}/[-._;()/:<>A-Za-z0-9\[\]]+").unwrap());
// A "doi:" label or resolver link followed by something that is not a DOI.
static DOI_LABEL: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)(?:\bdoi:\s*|doi\.org/)([^\s,;]+)").unwrap());
pub(crate) static ARXIV_NEW: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\d{4}\.\d{4,5}$").unwrap());
pub(crate) static ARXIV_OLD: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^[a-z][a-z\-]+(?:\.[A-Z]{2})?/\d{7}$").unwrap());
static ARXIV_SCAN: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"(?i)(?:arxiv:\s*|arxiv\.org/(?:abs|pdf)/)((?:\d{4}\.\d{4,5})|(?:[a-z][a-z\-]+(?:\.[A-Z]{2})?/\d{7}))(?:v(\d+))?",
    )
    .unwrap()
});
static URL_SCAN: Lazy<Regex> = Lazy::new(|| Regex::new(r#"https?://[^\s<>"“”]+"#).unwrap());

pub fn is_valid_doi(doi: &str) -> bool {
    DOI_PATTERN.is_match(doi)
}

pub fn is_valid_arxiv_id(id: &str) -> bool {
    ARXIV_NEW.is_match(id) || ARXIV_OLD.is_match(id)
}

/// Strips resolver prefixes, lowercases and trims trailing punctuation.
pub fn normalize_doi(raw: &str) -> String {
    let mut s = raw.trim();
    for prefix in ["https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/", "doi.org/"] {
        if s.len() >= prefix.len() && s[..prefix.len()].eq_ignore_ascii_case(prefix) {
            s = &s[prefix.len()..];
        }
    }
    if s.len() >= 4 && s[..4].eq_ignore_ascii_case("doi:") {
        s = s[4..].trim_start();
    }
    trim_trailing_punct(s).to_lowercase()
}

fn trim_trailing_punct(s: &str) -> &str {
    let mut s = s.trim_end_matches(['.', ',', ';', ':', ']', '>', '\'', '"', '”']);
    // Drop an unbalanced closing parenthesis: "(doi:10.1/x)".
    while s.ends_with(')') && s.matches('(').count() < s.matches(')').count() {
        s = s[..s.len() - 1].trim_end_matches(['.', ',', ';', ':']);
    }
    s
}

pub fn find_identifiers(raw_text: &str) -> Identifiers {
    let mut ids = Identifiers::default();

    for m in URL_SCAN.find_iter(raw_text) {
        let url = trim_trailing_punct(m.as_str()).to_owned();
        if !ids.urls.contains(&url) {
            ids.urls.push(url);
        }
    }

    for m in DOI_SCAN.find_iter(raw_text) {
        let doi = normalize_doi(m.as_str());
        if is_valid_doi(&doi) && !ids.all_dois.contains(&doi) {
            ids.all_dois.push(doi);
        }
    }
    ids.doi = ids.all_dois.first().cloned();
    if ids.doi.is_none() {
        ids.malformed_doi = DOI_LABEL
            .captures_iter(raw_text)
            .map(|c| trim_trailing_punct(&c[1]).to_owned())
            .find(|s| !s.is_empty());
    }

    if let Some(c) = ARXIV_SCAN.captures(raw_text) {
        let id = c[1].to_owned();
        if is_valid_arxiv_id(&id) {
            ids.arxiv_id = Some(id);
            ids.arxiv_version = c.get(2).and_then(|v| v.as_str().parse().ok());
        }
    }
    // arXiv DOIs carry the identifier too: 10.48550/arXiv.2104.01777
    if ids.arxiv_id.is_none() {
        if let Some(id) = ids.all_dois.iter().find_map(|d| d.strip_prefix("10.48550/arxiv.")) {
            if ARXIV_NEW.is_match(id) {
                ids.arxiv_id = Some(id.to_owned());
            }
        }
    }
    ids
}
