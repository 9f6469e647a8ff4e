//! Bibliography extraction: document text, bibliography isolation, entry splitting.

mod headings;
#[cfg(feature = "pdf")]
mod pdf;

use std::collections::HashMap;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "pdf")]
pub use pdf::PdfExtractBackend;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("malformed PDF: {0}")]
    MalformedPdf(String),
    #[error("document has no extractable text")]
    EmptyDocument,
    #[error("no \"references\" or \"bibliography\" heading found")]
    NoBibliographyFound,
    #[error("bibliography heading found but no text follows it")]
    EmptyBibliography,
    #[error("no [N] entry markers found in bibliography")]
    NoEntriesFound,
    #[error("no PDF backend available (built without the `pdf` feature)")]
    NoPdfBackend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Pdf,
    PlainText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentText {
    pub pages: Vec<String>,
    pub full_text: String,
    pub source_kind: SourceKind,
}

impl DocumentText {
    /// Builds a document from page texts; `full_text` is the pages joined by newlines.
    pub fn from_pages(pages: Vec<String>, source_kind: SourceKind) -> Result<Self, ExtractError> {
        let full_text = pages.join("\n");
        if full_text.trim().is_empty() {
            return Err(ExtractError::EmptyDocument);
        }
        Ok(Self { pages, full_text, source_kind })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadingKind {
    References,
    Bibliography,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibliographySlice {
    pub text: String,
    /// Character (not byte) offset of `text` within the document's full text.
    pub start_offset: usize,
    pub heading_matched: HeadingKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BibEntry {
    pub index: u32,
    pub raw_text: String,
    pub paper_id: String,
}

/// Turns PDF bytes into page texts.
pub trait PdfBackend: Send + Sync {
    fn pages(&self, bytes: &[u8]) -> Result<Vec<String>, ExtractError>;
}

pub enum Input<'a> {
    Bytes(&'a [u8]),
    Text(&'a str),
}

/// Extracts document text with the default PDF backend.
pub fn extract_text(input: Input<'_>, kind: SourceKind) -> Result<DocumentText, ExtractError> {
    #[cfg(feature = "pdf")]
    {
        extract_text_with(input, kind, &PdfExtractBackend)
    }
    #[cfg(not(feature = "pdf"))]
    {
        struct Missing;
        impl PdfBackend for Missing {
            fn pages(&self, _: &[u8]) -> Result<Vec<String>, ExtractError> {
                Err(ExtractError::NoPdfBackend)
            }
        }
        extract_text_with(input, kind, &Missing)
    }
}

pub fn extract_text_with(
    input: Input<'_>,
    kind: SourceKind,
    backend: &dyn PdfBackend,
) -> Result<DocumentText, ExtractError> {
    match kind {
        SourceKind::PlainText => {
            let text = match input {
                Input::Text(t) => t.to_owned(),
                Input::Bytes(b) => String::from_utf8_lossy(b).into_owned(),
            };
            if text.trim().is_empty() {
                return Err(ExtractError::EmptyDocument);
            }
            Ok(DocumentText { pages: vec![text.clone()], full_text: text, source_kind: kind })
        }
        SourceKind::Pdf => {
            let bytes = match input {
                Input::Bytes(b) => b,
                Input::Text(t) => t.as_bytes(),
            };
            if bytes.is_empty() {
                return Err(ExtractError::EmptyDocument);
            }
            let raw_pages = backend.pages(bytes)?;
            let pages = strip_running_lines(&raw_pages)
                .into_iter()
                .map(|p| repair_line_wraps(&p))
                .collect();
            DocumentText::from_pages(pages, SourceKind::Pdf)
        }
    }
}

/// Removes lines repeated verbatim on at least three pages (running heads and feet)
/// and bare page numbers at the top or bottom of a page.
pub fn strip_running_lines(pages: &[String]) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for page in pages {
        let mut lines: Vec<&str> = page.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        lines.sort_unstable();
        lines.dedup();
        for l in lines {
            *seen.entry(l).or_default() += 1;
        }
    }
    pages
        .iter()
        .map(|page| {
            let mut kept: Vec<&str> = page
                .lines()
                .filter(|l| {
                    let t = l.trim();
                    t.is_empty() || seen.get(t).copied().unwrap_or(0) < 3
                })
                .collect();
            let is_page_number = |l: &str| {
                let t = l.trim();
                !t.is_empty() && t.len() <= 4 && t.chars().all(|c| c.is_ascii_digit())
            };
            while kept.first().is_some_and(|l| l.trim().is_empty() || is_page_number(l)) {
                kept.remove(0);
            }
            while kept.last().is_some_and(|l| l.trim().is_empty() || is_page_number(l)) {
                kept.pop();
            }
            kept.join("\n")
        })
        .collect()
}

/// Joins hyphenated line breaks and unwraps lines, keeping breaks that precede
/// an entry marker or surround a short heading-like line.
pub fn repair_line_wraps(text: &str) -> String {
    static MARKER_START: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*\[\d+\]").unwrap());
    let lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    let mut out = String::with_capacity(text.len());
    for (i, line) in lines.iter().enumerate() {
        let trimmed = line.trim_start();
        if i == 0 {
            out.push_str(trimmed);
            continue;
        }
        let prev = lines[i - 1];
        let structural = trimmed.is_empty()
            || prev.trim().is_empty()
            || MARKER_START.is_match(trimmed)
            || headings::is_heading_line(trimmed)
            || headings::is_heading_line(prev.trim());
        if structural {
            out.push('\n');
            out.push_str(trimmed);
        } else if out.ends_with('-')
            && !out.ends_with("--")
            && trimmed.chars().next().is_some_and(char::is_lowercase)
            && out[..out.len() - 1].chars().last().is_some_and(char::is_alphabetic)
        {
            out.pop();
            out.push_str(trimmed);
        } else {
            out.push(' ');
            out.push_str(trimmed);
        }
    }
    out
}

/// Isolates the text between the last bibliography heading and the next appendix heading.
pub fn isolate_bibliography(doc: &DocumentText) -> Result<BibliographySlice, ExtractError> {
    let text = doc.full_text.as_str();
    if text.trim().is_empty() {
        return Err(ExtractError::EmptyDocument);
    }
    let (heading_end, heading_matched) =
        headings::last_bibliography_heading(text).ok_or(ExtractError::NoBibliographyFound)?;
    let end = headings::next_appendix_heading(text, heading_end).unwrap_or(text.len());
    let slice = &text[heading_end..end];
    if slice.trim().is_empty() {
        return Err(ExtractError::EmptyBibliography);
    }
    Ok(BibliographySlice {
        text: slice.to_owned(),
        start_offset: text[..heading_end].chars().count(),
        heading_matched,
    })
}

/// Splits a bibliography slice into numbered entries.
///
/// A bracketed number opens a new entry when it follows a line start or whitespace and
/// either continues the numbering (previous + 1) or, failing continuity, sits at a line
/// start with a larger number. Anything else is treated as inline text.
pub fn split_entries(slice: &BibliographySlice, paper_id: &str) -> Result<Vec<BibEntry>, ExtractError> {
    static MARKER: Lazy<Regex> = Lazy::new(|| Regex::new(r"\[(\d{1,4})\]").unwrap());
    let text = slice.text.as_str();

    let mut accepted: Vec<(usize, usize, u32)> = Vec::new(); // (marker start, marker end, index)
    for m in MARKER.captures_iter(text) {
        let whole = m.get(0).unwrap();
        let start = whole.start();
        let before = &text[..start];
        let prev_char = before.chars().last();
        if prev_char.is_some_and(|c| !c.is_whitespace()) {
            continue;
        }
        let line_start = before.rsplit('\n').next().is_some_and(|l| l.trim().is_empty());
        let Ok(index) = m[1].parse::<u32>() else { continue };
        if index == 0 {
            continue;
        }
        let accept = match accepted.last() {
            None => true,
            Some(&(_, _, prev)) => index == prev + 1 || (line_start && index > prev),
        };
        if accept {
            accepted.push((start, whole.end(), index));
        }
    }
    if accepted.is_empty() {
        return Err(ExtractError::NoEntriesFound);
    }
    if !text[..accepted[0].0].trim().is_empty() {
        tracing::debug!(paper_id, "text before first entry marker ignored");
    }

    let mut entries = Vec::with_capacity(accepted.len());
    for (i, &(_, body_start, index)) in accepted.iter().enumerate() {
        let body_end = accepted.get(i + 1).map_or(text.len(), |next| next.0);
        let raw = text[body_start..body_end].trim();
        if raw.is_empty() {
            continue;
        }
        entries.push(BibEntry { index, raw_text: raw.to_owned(), paper_id: paper_id.to_owned() });
    }
    if entries.is_empty() {
        return Err(ExtractError::NoEntriesFound);
    }
    Ok(entries)
}
