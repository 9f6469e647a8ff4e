//! Random inputs for the similarity and author-diff oracles.

use citeverify::parse::PersonName;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bibforge::{FAMILY, GIVEN, WORDS};
use super::oracle::levenshtein;

const SHORT_WORDS: &[&str] = &["a", "an", "of", "on", "io", "gpu", "mpi", "hpc", "x86", "3d", "2"];

fn random_word(rng: &mut ChaCha8Rng) -> String {
    let w = if rng.gen_bool(0.15) { SHORT_WORDS.choose(rng) } else { WORDS.choose(rng) };
    let w = w.unwrap().to_string();
    match rng.gen_range(0..4) {
        0 => w.to_uppercase(),
        1 => {
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
        }
        _ => w,
    }
}

fn join(rng: &mut ChaCha8Rng, words: &[String]) -> String {
    let mut s = String::new();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            s.push_str(["  ", " ", " ", "-", ", ", " / ", "'s "][rng.gen_range(0..7)]);
        }
        s.push_str(w);
    }
    if rng.gen_bool(0.2) {
        s.push(['.', '?', '!'][rng.gen_range(0..3)]);
    }
    s
}

fn typo(rng: &mut ChaCha8Rng, w: &str) -> String {
    let mut cs: Vec<char> = w.chars().collect();
    let i = rng.gen_range(0..cs.len());
    match rng.gen_range(0..3) {
        0 => {
            cs.remove(i);
        }
        1 => cs.insert(i, (b'a' + rng.gen_range(0..26)) as char),
        _ => cs[i] = (b'a' + rng.gen_range(0..26)) as char,
    }
    if cs.is_empty() {
        cs.push('z');
    }
    cs.into_iter().collect()
}

fn mutate(rng: &mut ChaCha8Rng, words: &[String]) -> Vec<String> {
    let mut w = words.to_vec();
    for _ in 0..rng.gen_range(0..=4) {
        let i = rng.gen_range(0..w.len().max(1));
        match rng.gen_range(0..5) {
            0 if w.len() > 1 => {
                w.remove(i);
            }
            1 => w.insert(i.min(w.len()), random_word(rng)),
            2 if !w.is_empty() => w[i] = random_word(rng),
            3 if !w.is_empty() => w[i] = typo(rng, &w[i]),
            4 if w.len() > 1 => {
                let j = (i + 1) % w.len();
                w.swap(i, j);
            }
            _ => {}
        }
    }
    w
}

/// `n` title pairs, mostly related by a few edits, some unrelated, some with subtitles.
pub fn similarity_pairs(seed: u64, n: usize) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=14);
            let a: Vec<String> = (0..len).map(|_| random_word(&mut rng)).collect();
            let b = if rng.gen_bool(0.2) {
                (0..rng.gen_range(1..=14)).map(|_| random_word(&mut rng)).collect()
            } else {
                mutate(&mut rng, &a)
            };
            let mut sa = join(&mut rng, &a);
            let mut sb = join(&mut rng, &b);
            if rng.gen_bool(0.25) {
                let sub: Vec<String> = (0..rng.gen_range(1..6)).map(|_| random_word(&mut rng)).collect();
                let sub = join(&mut rng, &sub);
                if rng.gen_bool(0.5) {
                    sa = format!("{sa}: {sub}");
                } else {
                    sb = format!("{sb}: {sub}");
                }
            }
            (sa, sb)
        })
        .collect()
}

fn ascii_fold(s: &str) -> String {
    s.replace('ü', "u").replace('ú', "u").replace('ñ', "n").replace('Ø', "O").replace('ø', "o")
}

fn within_tolerance(a: &str, b: &str) -> bool {
    let (a, b): (Vec<char>, Vec<char>) = (a.to_lowercase().chars().collect(), b.to_lowercase().chars().collect());
    let d = levenshtein(&a, &b);
    d <= 2 && d as f64 <= 0.3 * a.len().max(b.len()) as f64
}

/// True when no two family names in the pool (or a family and a given name) could be
/// mistaken for each other under the misspelling tolerance.
pub fn name_pool_is_separated() -> bool {
    let folded: Vec<String> = FAMILY.iter().map(|f| ascii_fold(f)).collect();
    for (i, a) in folded.iter().enumerate() {
        for b in folded.iter().skip(i + 1) {
            if within_tolerance(a, b) {
                return false;
            }
        }
        if GIVEN.iter().any(|g| within_tolerance(a, g)) {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone)]
pub struct AuthorCase {
    pub truth: Vec<PersonName>,
    pub truth_ids: Vec<usize>,
    pub cited: Vec<PersonName>,
    pub cited_ids: Vec<usize>,
    pub et_al: bool,
    /// Only ignorable differences were planted.
    pub clean: bool,
}

fn person(id: usize, given: &[usize]) -> (String, String) {
    (GIVEN[given[id]].to_string(), FAMILY[id].to_string())
}

/// One misspelling of `family`: a single edit that stays clear of every other pool name.
fn misspell(rng: &mut ChaCha8Rng, family: &str) -> Option<String> {
    let folded = ascii_fold(family);
    if folded.chars().count() < 7 {
        return None;
    }
    for _ in 0..20 {
        let v = typo(rng, &folded);
        let v: String = v.chars().enumerate().map(|(i, c)| if i == 0 { c.to_ascii_uppercase() } else { c }).collect();
        if v.to_lowercase() == folded.to_lowercase() {
            continue;
        }
        let clashes = FAMILY.iter().filter(|f| **f != family).any(|f| within_tolerance(&v, &ascii_fold(f)))
            || GIVEN.iter().any(|g| within_tolerance(&v, g));
        if !clashes {
            return Some(v);
        }
    }
    None
}

/// A truth list and a cited list with planted deletions, insertions, reversals,
/// misspellings, stripped diacritics and et-al truncation.
pub fn author_case(rng: &mut ChaCha8Rng) -> AuthorCase {
    // Each identity is one family name with a fixed given name.
    let given: Vec<usize> = (0..FAMILY.len()).map(|_| rng.gen_range(0..GIVEN.len())).collect();
    let mut ids: Vec<usize> = (0..FAMILY.len()).collect();
    ids.shuffle(rng);
    let n_truth = rng.gen_range(1..=6);
    let truth_ids: Vec<usize> = ids[..n_truth].to_vec();
    let outsiders: Vec<usize> = ids[n_truth..].to_vec();
    let truth: Vec<PersonName> = truth_ids
        .iter()
        .map(|&id| {
            let (g, f) = person(id, &given);
            PersonName::new(Some(&g), &f)
        })
        .collect();

    let structural = rng.gen_bool(0.6);
    let mut cited_ids: Vec<usize> = truth_ids.clone();
    let mut et_al = false;
    if structural {
        for _ in 0..rng.gen_range(1..=3) {
            match rng.gen_range(0..2) {
                0 if cited_ids.len() > 1 => {
                    let i = rng.gen_range(0..cited_ids.len());
                    cited_ids.remove(i);
                }
                _ => {
                    let o = *outsiders.choose(rng).unwrap();
                    if !cited_ids.contains(&o) {
                        let i = rng.gen_range(0..=cited_ids.len());
                        cited_ids.insert(i, o);
                    }
                }
            }
        }
    }
    if rng.gen_bool(0.25) && cited_ids.len() > 1 {
        cited_ids.truncate(rng.gen_range(1..cited_ids.len()));
        et_al = true;
    }

    let cited = cited_ids
        .iter()
        .map(|&id| {
            let (g, f) = person(id, &given);
            let in_truth = truth_ids.contains(&id);
            match rng.gen_range(0..6) {
                0 if in_truth => PersonName::new(Some(&f), &g),
                1 if in_truth => match misspell(rng, &f) {
                    Some(v) => PersonName::new(Some(&g), &v),
                    None => PersonName::new(Some(&g), &f),
                },
                2 => PersonName::new(Some(&g), &ascii_fold(&f)),
                3 => PersonName::new(Some(&format!("{}.", &g[..1])), &f),
                _ => PersonName::new(Some(&g), &f),
            }
        })
        .collect();

    let clean = {
        let mut c = cited_ids.clone();
        c.sort_unstable();
        let mut t = truth_ids.clone();
        if et_al {
            t.retain(|id| c.contains(id));
        }
        t.sort_unstable();
        c == t
    };
    AuthorCase { truth, truth_ids, cited, cited_ids, et_al, clean }
}
