use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CorpusStats, PaperReport, ReportError, Verdict};

/// Original id → digest, for the operator only; never shipped with anonymized output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnonymizationMap {
    pub ids: BTreeMap<String, String>,
}

pub fn anonymize_id(salt: &str, id: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt.as_bytes());
    h.update([0u8]);
    h.update(id.as_bytes());
    format!("anon-{}", &hex::encode(h.finalize())[..16])
}

impl AnonymizationMap {
    fn swap(&mut self, salt: &str, id: &str) -> String {
        let d = anonymize_id(salt, id);
        self.ids.insert(id.to_owned(), d.clone());
        d
    }
}

/// Replaces paper, corpus and reviewer ids with salted digests. Citation text and
/// parsed fields are left alone; they are the evidence.
pub trait Anonymize: Sized {
    fn anonymize_with(&self, salt: &str, map: &mut AnonymizationMap) -> Self;
}

impl Anonymize for Verdict {
    fn anonymize_with(&self, salt: &str, map: &mut AnonymizationMap) -> Self {
        let mut v = self.clone();
        v.citation_key.paper_id = map.swap(salt, &v.citation_key.paper_id);
        v.reviewer = map.swap(salt, &v.reviewer);
        v
    }
}

impl Anonymize for PaperReport {
    fn anonymize_with(&self, salt: &str, map: &mut AnonymizationMap) -> Self {
        let mut r = self.clone();
        r.paper_id = map.swap(salt, &r.paper_id);
        for c in &mut r.citations {
            c.entry.paper_id = r.paper_id.clone();
            c.parsed.entry.paper_id = r.paper_id.clone();
            c.verdict = c.verdict.as_ref().map(|v| v.anonymize_with(salt, map));
        }
        r
    }
}

impl Anonymize for CorpusStats {
    fn anonymize_with(&self, salt: &str, map: &mut AnonymizationMap) -> Self {
        let mut s = self.clone();
        s.corpus_id = map.swap(salt, &s.corpus_id);
        s
    }
}

impl<T: Anonymize + Clone> Anonymize for Vec<T> {
    fn anonymize_with(&self, salt: &str, map: &mut AnonymizationMap) -> Self {
        self.iter().map(|x| x.anonymize_with(salt, map)).collect()
    }
}

pub fn anonymize<T: Anonymize>(value: &T, salt: &str) -> Result<(T, AnonymizationMap), ReportError> {
    if salt.is_empty() {
        return Err(ReportError::EmptySalt);
    }
    let mut map = AnonymizationMap::default();
    let out = value.anonymize_with(salt, &mut map);
    Ok((out, map))
}
