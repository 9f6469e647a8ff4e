use once_cell::sync::Lazy;
use regex::Regex;

use super::HeadingKind;

static BIB_WORD: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\b(references|bibliography)\b").unwrap());
static APPENDIX_WORD: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\b(appendix|appendices)\b").unwrap());
// Section numbering allowed before a heading word: "7.", "VII.", "A.", "7 ".
static SECTION_NUMBER: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*(?:\d{1,2}(?:\.\d{1,2})*|[IVXLC]{1,6}|[A-Z])\.?\s+$").unwrap());
static HEADING_LINE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)^(?:(?:\d{1,2}|[IVXLC]{1,6}|[A-Z])\.?\s+)?(?:references|bibliography|appendix|appendices)\b")
        .unwrap()
});

/// True when the match at `start` sits in heading position: at line start, after at
/// most three non-alphanumeric characters, or after a bare section number.
fn heading_position(text: &str, start: usize) -> bool {
    let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
    let prefix = &text[line_start..start];
    if prefix.chars().count() <= 3 && !prefix.chars().any(char::is_alphanumeric) {
        return true;
    }
    SECTION_NUMBER.is_match(prefix)
}

/// Byte offset just past the last bibliography heading, plus which word matched.
///
/// Heading-position matches are preferred; when none exist the last plain occurrence is used.
pub(super) fn last_bibliography_heading(text: &str) -> Option<(usize, HeadingKind)> {
    let mut last_heading = None;
    let mut last_any = None;
    for m in BIB_WORD.find_iter(text) {
        let kind = if m.as_str().eq_ignore_ascii_case("bibliography") {
            HeadingKind::Bibliography
        } else {
            HeadingKind::References
        };
        last_any = Some((m.end(), kind));
        if heading_position(text, m.start()) {
            last_heading = Some((m.end(), kind));
        }
    }
    last_heading.or(last_any)
}

/// Byte offset of the first appendix heading at or after `from`.
pub(super) fn next_appendix_heading(text: &str, from: usize) -> Option<usize> {
    APPENDIX_WORD
        .find_iter(&text[from..])
        .map(|m| m.start() + from)
        .find(|&start| heading_position(text, start))
}

/// True for short lines that look like a references or appendix heading.
pub(super) fn is_heading_line(line: &str) -> bool {
    line.chars().count() <= 60 && HEADING_LINE.is_match(line.trim())
}
