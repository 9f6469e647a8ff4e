use crate::text::{char_levenshtein, tokens};

/// Token count below which similarity falls back to character-level edit distance.
pub const SHORT_TITLE_TOKENS: usize = 4;

/// Similarity in [0, 1] between two titles.
///
/// Titles are normalized (case, Unicode, diacritics, punctuation, whitespace), then
/// scored as one minus a token-level edit distance divided by the longer token count.
/// Substituting one token for another costs their character edit distance divided by
/// the longer token's length, so a misspelled word costs less than a replaced word.
/// Titles shorter than four tokens use character-level distance instead. The score is
/// also computed with either side cut at its first colon, and the maximum is returned.
pub fn title_similarity(a: &str, b: &str) -> f64 {
    let full_a = tokens(a);
    let full_b = tokens(b);
    let mut best = token_similarity(&full_a, &full_b);
    if let Some(head) = before_colon(a) {
        best = best.max(token_similarity(&tokens(head), &full_b));
    }
    if let Some(head) = before_colon(b) {
        best = best.max(token_similarity(&full_a, &tokens(head)));
    }
    best
}

fn before_colon(s: &str) -> Option<&str> {
    let (head, _) = s.split_once(':')?;
    (!head.trim().is_empty()).then_some(head)
}

/// Similarity of two normalized token sequences.
pub fn token_similarity(a: &[String], b: &[String]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let longest = a.len().max(b.len());
    if longest < SHORT_TITLE_TOKENS {
        let sa = a.join(" ");
        let sb = b.join(" ");
        let denom = sa.chars().count().max(sb.chars().count());
        return 1.0 - char_levenshtein(&sa, &sb) as f64 / denom as f64;
    }
    1.0 - weighted_token_distance(a, b) / longest as f64
}

fn substitution_cost(x: &str, y: &str) -> f64 {
    if x == y {
        return 0.0;
    }
    let denom = x.chars().count().max(y.chars().count());
    char_levenshtein(x, y) as f64 / denom as f64
}

fn weighted_token_distance(a: &[String], b: &[String]) -> f64 {
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64).collect();
    let mut cur = vec![0.0; b.len() + 1];
    for (i, ta) in a.iter().enumerate() {
        cur[0] = (i + 1) as f64;
        for (j, tb) in b.iter().enumerate() {
            let sub = prev[j] + substitution_cost(ta, tb);
            cur[j + 1] = sub.min(prev[j + 1] + 1.0).min(cur[j] + 1.0);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
