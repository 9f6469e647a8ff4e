//! Reference parsing: identifiers, format grammars, author lists and LLM URL markers.

mod grammar;
mod identifiers;
mod markers;
mod names;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::extract::BibEntry;
use crate::text::{collapse_whitespace, nfc};

pub use grammar::{Grammar, GrammarError, GrammarTable, BUILTIN_GRAMMARS, FORMAT_COUNT};
pub use identifiers::{find_identifiers, is_valid_arxiv_id, is_valid_doi, normalize_doi, Identifiers};
pub use markers::{detect_llm_url_markers, detect_llm_url_markers_with, LlmUrlMarker, DEFAULT_LLM_MARKERS};
pub use names::{parse_authors, AuthorList, PersonName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseConfidence {
    High,
    Low,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedReference {
    pub entry: BibEntry,
    pub title: Option<String>,
    pub authors: Vec<PersonName>,
    pub et_al: bool,
    pub venue: Option<String>,
    pub year: Option<i32>,
    pub pages: Option<String>,
    pub identifiers: Identifiers,
    pub format_id: Option<u8>,
    pub llm_markers: Vec<LlmUrlMarker>,
    pub parse_confidence: ParseConfidence,
}

/// Parses an entry with the built-in grammar table and default marker set.
pub fn parse_reference(entry: &BibEntry) -> ParsedReference {
    parse_reference_with(entry, GrammarTable::builtin(), DEFAULT_LLM_MARKERS)
}

pub fn parse_reference_with<S: AsRef<str>>(entry: &BibEntry, table: &GrammarTable, markers: &[S]) -> ParsedReference {
    let text = collapse_whitespace(&nfc(&entry.raw_text));
    let identifiers = find_identifiers(&text);
    let llm_markers = detect_llm_url_markers_with(&identifiers, markers);

    let mut parsed = ParsedReference {
        entry: entry.clone(),
        title: None,
        authors: Vec::new(),
        et_al: false,
        venue: None,
        year: None,
        pages: None,
        identifiers,
        format_id: None,
        llm_markers,
        parse_confidence: ParseConfidence::Low,
    };

    for grammar in table.grammars() {
        let Some(caps) = grammar.captures(&text) else { continue };
        let Some(title) = caps.name("title").map(|m| clean_title(m.as_str())).filter(|t| !t.is_empty()) else {
            continue;
        };
        parsed.title = Some(title);
        if let Some(a) = caps.name("authors") {
            let list = parse_authors(a.as_str());
            parsed.authors = list.names;
            parsed.et_al = list.et_al;
        }
        parsed.venue = caps.name("venue").map(|m| clean_field(m.as_str())).filter(|v| !v.is_empty());
        parsed.year = caps.name("year").and_then(|m| parse_year(m.as_str()));
        parsed.pages = caps.name("pages").map(|m| m.as_str().to_owned());
        parsed.format_id = Some(grammar.id);
        parsed.parse_confidence = ParseConfidence::High;
        return parsed;
    }

    parsed.title = fallback_title(&text);
    parsed.year = fallback_year(&text);
    parsed
}

fn clean_title(s: &str) -> String {
    s.trim().trim_end_matches([',', '.', ';', ':']).trim().to_owned()
}

fn clean_field(s: &str) -> String {
    s.trim().trim_end_matches([',', '.']).trim().to_owned()
}

fn parse_year(s: &str) -> Option<i32> {
    s.get(..4)?.parse().ok().filter(|y| (1800..=2100).contains(y))
}

fn fallback_year(text: &str) -> Option<i32> {
    static YEAR: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b((?:18|19|20)\d{2})\b").unwrap());
    YEAR.captures_iter(text).filter_map(|c| parse_year(&c[1])).last()
}

/// Longest quoted span, else the longest mostly-capitalized span between periods.
fn fallback_title(text: &str) -> Option<String> {
    static QUOTED: Lazy<Regex> = Lazy::new(|| Regex::new(r#"["“]([^"“”]{3,})["”]"#).unwrap());
    if let Some(q) = QUOTED
        .captures_iter(text)
        .map(|c| clean_title(&c[1]))
        .filter(|t| t.chars().any(char::is_alphabetic))
        .max_by_key(|t| t.chars().count())
    {
        return Some(q);
    }
    text.split(". ")
        .map(clean_title)
        .filter(|span| {
            let words: Vec<&str> = span.split_whitespace().collect();
            if words.len() < 3 || span.contains("http") {
                return false;
            }
            let capitalized = words.iter().filter(|w| w.chars().next().is_some_and(char::is_uppercase)).count();
            capitalized * 2 > words.len()
        })
        .max_by_key(|t| t.chars().count())
}
