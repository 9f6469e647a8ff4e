use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PersonName {
    pub given: Option<String>,
    pub family: String,
    /// Source span the name was parsed from.
    pub raw: String,
}

impl PersonName {
    pub fn new(given: Option<&str>, family: &str) -> Self {
        let raw = match given {
            Some(g) => format!("{g} {family}"),
            None => family.to_owned(),
        };
        Self { given: given.map(str::to_owned), family: family.to_owned(), raw }
    }

    /// Parses a single personal name in "Given Family" or "Family INITIALS" order.
    pub fn parse(raw: &str) -> Option<Self> {
        let raw = raw.trim().trim_end_matches([',', ';']).trim();
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() || !tokens.iter().any(|t| t.chars().any(char::is_alphabetic)) {
            return None;
        }
        if tokens.len() == 1 {
            return Some(Self { given: None, family: tokens[0].to_owned(), raw: raw.to_owned() });
        }
        let last = *tokens.last().unwrap();
        let first = tokens[0];
        // "Smith JA": trailing run of capital initials without periods.
        let vancouver = last.chars().count() <= 3
            && last.chars().all(|c| c.is_uppercase())
            && first.chars().any(char::is_lowercase);
        if vancouver {
            let family = tokens[..tokens.len() - 1].join(" ");
            return Some(Self { given: Some(last.to_owned()), family, raw: raw.to_owned() });
        }

        let mut family_start = tokens.len() - 1;
        if family_start > 0 && is_suffix(tokens[family_start]) {
            family_start -= 1;
        }
        while family_start > 1 && is_particle(tokens[family_start - 1]) {
            family_start -= 1;
        }
        let given = tokens[..family_start].join(" ");
        let family = tokens[family_start..].join(" ");
        Some(Self {
            given: (!given.is_empty()).then_some(given),
            family,
            raw: raw.to_owned(),
        })
    }
}

fn is_particle(t: &str) -> bool {
    matches!(
        t,
        "van" | "von" | "der" | "den" | "de" | "del" | "della" | "di" | "da" | "la" | "le" | "du" | "dos" | "das"
            | "ter" | "ten" | "bin" | "al" | "dal" | "st."
    )
}

fn is_suffix(t: &str) -> bool {
    matches!(t, "Jr." | "Jr" | "Sr." | "Sr" | "II" | "III" | "IV")
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuthorList {
    pub names: Vec<PersonName>,
    pub et_al: bool,
}

static ET_AL: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)[,;]?\s*(?:\bet\.?\s*al\b\.?|\band\s+others\b)").unwrap());
static SEPARATORS: Lazy<Regex> = Lazy::new(|| Regex::new(r"\s*(?:[,;]\s*(?:and\s+|&\s*)?|\s+and\s+|\s*&\s*)").unwrap());

/// Splits an author string on "and", "&", commas and semicolons; "et al." sets a flag.
pub fn parse_authors(s: &str) -> AuthorList {
    let et_al = ET_AL.is_match(s);
    let cleaned = ET_AL.replace_all(s, "");
    let cleaned = cleaned.trim().trim_start_matches("and ").trim_end_matches(',').trim();
    let names = SEPARATORS
        .split(cleaned)
        .filter_map(|piece| {
            let piece = piece.trim();
            let piece = piece.strip_prefix("and ").unwrap_or(piece);
            PersonName::parse(piece)
        })
        .collect();
    AuthorList { names, et_al }
}
