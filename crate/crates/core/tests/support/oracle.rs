//! Reference implementations the library is checked against. Written from the matching
//! rules directly, without calling into the library's own normalization or distance code.

use std::collections::{BTreeSet, HashMap};

/// Tokenizer for ASCII test strings: lowercase, apostrophes vanish, anything else that
/// is not alphanumeric separates tokens.
pub fn ascii_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        assert!(c.is_ascii(), "oracle only handles ASCII");
        if c.is_ascii_alphanumeric() {
            cur.push(c.to_ascii_lowercase());
        } else if c == '\'' {
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Plain recursive Levenshtein distance with memoization.
pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo).min(go(a, b, i, j + 1, memo)).min(go(a, b, i + 1, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

fn word_cost(x: &str, y: &str) -> f64 {
    let (x, y): (Vec<char>, Vec<char>) = (x.chars().collect(), y.chars().collect());
    levenshtein(&x, &y) as f64 / x.len().max(y.len()) as f64
}

/// Token edit distance where substituting one word for another costs their relative
/// character distance, searched exhaustively over alignments with memoization.
pub fn weighted_token_distance(a: &[String], b: &[String]) -> f64 {
    fn go(a: &[String], b: &[String], i: usize, j: usize, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if i == a.len() {
            return (b.len() - j) as f64;
        }
        if j == b.len() {
            return (a.len() - i) as f64;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let del = 1.0 + go(a, b, i + 1, j, memo);
        let ins = 1.0 + go(a, b, i, j + 1, memo);
        let sub = word_cost(&a[i], &b[j]) + go(a, b, i + 1, j + 1, memo);
        let v = del.min(ins).min(sub);
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

fn token_score(a: &[String], b: &[String]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let longest = a.len().max(b.len());
    if longest < 4 {
        let sa: Vec<char> = a.join(" ").chars().collect();
        let sb: Vec<char> = b.join(" ").chars().collect();
        return 1.0 - levenshtein(&sa, &sb) as f64 / sa.len().max(sb.len()) as f64;
    }
    1.0 - weighted_token_distance(a, b) / longest as f64
}

/// Title similarity: best of the full strings and either side cut at its first colon.
pub fn title_similarity(a: &str, b: &str) -> f64 {
    let head = |s: &str| s.split_once(':').map(|(h, _)| h.to_owned()).filter(|h| !h.trim().is_empty());
    let (ta, tb) = (ascii_tokens(a), ascii_tokens(b));
    let mut best = token_score(&ta, &tb);
    if let Some(h) = head(a) {
        best = best.max(token_score(&ascii_tokens(&h), &tb));
    }
    if let Some(h) = head(b) {
        best = best.max(token_score(&ta, &ascii_tokens(&h)));
    }
    best
}

/// Expected author diff from the generator's ground truth: identities present on one
/// side only. Under "et al." the cited list may stop early, so nothing is missing.
pub fn author_set_difference(cited_ids: &[usize], truth_ids: &[usize], et_al: bool) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let c: BTreeSet<usize> = cited_ids.iter().copied().collect();
    let t: BTreeSet<usize> = truth_ids.iter().copied().collect();
    let extra = c.difference(&t).copied().collect();
    let missing = if et_al { BTreeSet::new() } else { t.difference(&c).copied().collect() };
    (missing, extra)
}
