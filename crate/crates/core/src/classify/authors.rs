use serde::{Deserialize, Serialize};

use crate::parse::PersonName;
use crate::text::{char_levenshtein, fold_diacritics, nfc};

use super::Thresholds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthorDiffKind {
    None,
    Missing,
    Extra,
    Both,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgnoredDiscrepancy {
    Misspelling,
    NameReversal,
    EtAlExpansion,
    SpecialCharacters,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorDiff {
    pub missing: Vec<PersonName>,
    pub extra: Vec<PersonName>,
    pub kind: AuthorDiffKind,
    pub ignored_discrepancies: Vec<IgnoredDiscrepancy>,
    /// Aligned (cited index, truth index) pairs.
    pub matched: Vec<(usize, usize)>,
}

impl AuthorDiff {
    pub fn not_applicable() -> Self {
        Self {
            missing: Vec::new(),
            extra: Vec::new(),
            kind: AuthorDiffKind::NotApplicable,
            ignored_discrepancies: Vec::new(),
            matched: Vec::new(),
        }
    }
}

/// Letters only, lowercased, diacritics folded.
pub fn canonical_name_part(s: &str) -> String {
    fold_diacritics(&nfc(s)).to_lowercase().chars().filter(|c| c.is_alphabetic()).collect()
}

fn first_initial(given: Option<&str>) -> Option<char> {
    given.and_then(|g| canonical_name_part(g).chars().next())
}

fn initials_compatible(a: Option<&str>, b: Option<&str>) -> bool {
    match (first_initial(a), first_initial(b)) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    }
}

/// A full given name (more than initials), canonicalized.
fn full_given(given: Option<&str>) -> Option<String> {
    let g = given?;
    let is_initials = g.split([' ', '-']).filter(|p| !p.is_empty()).all(|p| {
        let letters = p.trim_end_matches('.');
        letters.chars().count() <= 1 || (letters.chars().all(char::is_uppercase) && letters.chars().count() <= 3)
    });
    (!is_initials).then(|| canonical_name_part(g))
}

fn within_tolerance(a: &str, b: &str, t: &Thresholds) -> bool {
    let d = char_levenshtein(a, b);
    let longest = a.chars().count().max(b.chars().count());
    d <= t.name_edit_max && (d as f64) <= t.name_edit_ratio * longest as f64
}

enum Tier {
    Exact,
    Reversal,
    Misspelled,
    InitialMismatch,
}

fn tier_matches(c: &PersonName, t: &PersonName, tier: &Tier, th: &Thresholds) -> bool {
    let cf = canonical_name_part(&c.family);
    let tf = canonical_name_part(&t.family);
    match tier {
        Tier::Exact => !cf.is_empty() && cf == tf && initials_compatible(c.given.as_deref(), t.given.as_deref()),
        Tier::Reversal => {
            // Cited "Given Family" swapped relative to the record.
            let Some(tg) = full_given(t.given.as_deref()) else { return false };
            if cf != tg {
                return false;
            }
            match c.given.as_deref().map(canonical_name_part) {
                Some(cg) => cg == tf || tf.starts_with(&cg),
                None => true,
            }
        }
        Tier::Misspelled => {
            cf != tf && within_tolerance(&cf, &tf, th) && initials_compatible(c.given.as_deref(), t.given.as_deref())
        }
        Tier::InitialMismatch => !cf.is_empty() && cf == tf,
    }
}

/// Aligns a cited author list against the record's list.
///
/// Misspellings within tolerance, first/last name reversal, "et al." standing in for the
/// remaining authors, and missing special characters are recorded as ignored rather
/// than counted as missing or extra authors.
pub fn compare_authors(cited: &[PersonName], et_al: bool, truth: &[PersonName], th: &Thresholds) -> AuthorDiff {
    let mut cited_used = vec![false; cited.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut matched = Vec::new();
    let mut ignored = Vec::new();

    for tier in [Tier::Exact, Tier::Reversal, Tier::Misspelled, Tier::InitialMismatch] {
        for (ci, c) in cited.iter().enumerate() {
            if cited_used[ci] {
                continue;
            }
            let hit = truth
                .iter()
                .enumerate()
                .find(|(ti, t)| !truth_used[*ti] && tier_matches(c, t, &tier, th));
            if let Some((ti, t)) = hit {
                cited_used[ci] = true;
                truth_used[ti] = true;
                matched.push((ci, ti));
                match tier {
                    Tier::Exact => {
                        if nfc(&c.family).to_lowercase() != nfc(&t.family).to_lowercase() {
                            ignored.push(IgnoredDiscrepancy::SpecialCharacters);
                        }
                    }
                    Tier::Reversal => ignored.push(IgnoredDiscrepancy::NameReversal),
                    Tier::Misspelled | Tier::InitialMismatch => ignored.push(IgnoredDiscrepancy::Misspelling),
                }
            }
        }
    }
    matched.sort_unstable();

    let extra: Vec<PersonName> =
        cited.iter().zip(&cited_used).filter(|(_, used)| !**used).map(|(n, _)| n.clone()).collect();
    let unmatched_truth: Vec<PersonName> =
        truth.iter().zip(&truth_used).filter(|(_, used)| !**used).map(|(n, _)| n.clone()).collect();
    let missing = if et_al {
        if !unmatched_truth.is_empty() {
            ignored.push(IgnoredDiscrepancy::EtAlExpansion);
        }
        Vec::new()
    } else {
        unmatched_truth
    };

    ignored.sort_unstable();
    ignored.dedup();
    let kind = match (missing.is_empty(), extra.is_empty()) {
        (true, true) => AuthorDiffKind::None,
        (false, true) => AuthorDiffKind::Missing,
        (true, false) => AuthorDiffKind::Extra,
        (false, false) => AuthorDiffKind::Both,
    };
    AuthorDiff { missing, extra, kind, ignored_discrepancies: ignored, matched }
}

/// Share of authors aligned between the citation and the record, in [0, 1].
pub fn author_score(cited: &[PersonName], et_al: bool, truth: &[PersonName], th: &Thresholds) -> f64 {
    if cited.is_empty() || truth.is_empty() {
        return 0.0;
    }
    let diff = compare_authors(cited, et_al, truth, th);
    let m = diff.matched.len() as f64;
    if et_al {
        m / cited.len() as f64
    } else {
        2.0 * m / (cited.len() + truth.len()) as f64
    }
}
