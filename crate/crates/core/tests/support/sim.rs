//! An in-memory aggregator that answers Crossref-style DOI lookups and title searches
//! from a registry of works. Every other host answers 404.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{DateTime, TimeZone, Utc};
use citeverify::sources::{HttpResponse, Transport, TransportError};
use citeverify::text::tokens;
use serde_json::{json, Value};

use super::bibforge::Work;

pub struct SimulatedAggregator {
    works: Vec<Work>,
    by_doi: HashMap<String, usize>,
    token_sets: Vec<HashSet<String>>,
    requests: AtomicUsize,
    pub recorded_at: DateTime<Utc>,
}

pub fn crossref_json(w: &Work) -> Value {
    let mut v = json!({
        "DOI": w.doi,
        "title": [w.title],
        "author": w.authors.iter().map(|p| json!({"given": p.given, "family": p.family})).collect::<Vec<_>>(),
        "publisher": w.publisher,
        "issued": {"date-parts": [[w.year]]},
        "page": w.page_range(),
    });
    if w.format != 5 {
        v["container-title"] = json!([w.venue]);
    }
    v
}

fn decode(s: &str) -> String {
    url::form_urlencoded::parse(format!("v={s}").as_bytes()).next().map(|(_, v)| v.into_owned()).unwrap_or_default()
}

impl SimulatedAggregator {
    pub fn new(works: Vec<Work>) -> Self {
        let by_doi = works.iter().enumerate().map(|(i, w)| (w.doi.to_lowercase(), i)).collect();
        let token_sets = works.iter().map(|w| tokens(&w.title).into_iter().collect()).collect();
        Self {
            works,
            by_doi,
            token_sets,
            requests: AtomicUsize::new(0),
            recorded_at: Utc.with_ymd_and_hms(2025, 6, 1, 12, 0, 0).unwrap(),
        }
    }

    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    fn respond(&self, status: u16, body: Value) -> Result<HttpResponse, TransportError> {
        Ok(HttpResponse { status, body: body.to_string(), fetched_at: self.recorded_at })
    }

    fn search(&self, query: &str, rows: usize) -> Vec<&Work> {
        let q: HashSet<String> = query.split_whitespace().map(str::to_owned).collect();
        let mut hits: Vec<(usize, usize)> = self
            .token_sets
            .iter()
            .enumerate()
            .map(|(i, t)| (t.intersection(&q).count(), i))
            .filter(|&(shared, _)| shared >= 2)
            .collect();
        hits.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        hits.into_iter().take(rows).map(|(_, i)| &self.works[i]).collect()
    }
}

impl Transport for SimulatedAggregator {
    fn get(&self, raw: &str, _user_agent: &str) -> Result<HttpResponse, TransportError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let url = url::Url::parse(raw).map_err(|e| TransportError::Network(e.to_string()))?;
        if url.host_str() != Some("api.crossref.org") {
            return self.respond(404, json!({"status": "not found"}));
        }
        let path = url.path();
        if let Some(doi) = path.strip_prefix("/works/") {
            return match self.by_doi.get(&decode(doi).to_lowercase()) {
                Some(&i) => self.respond(200, json!({"status": "ok", "message": crossref_json(&self.works[i])})),
                None => self.respond(404, json!({"status": "not found"})),
            };
        }
        if path == "/works" {
            let pairs: HashMap<String, String> = url.query_pairs().into_owned().collect();
            let q = pairs.get("query.bibliographic").cloned().unwrap_or_default();
            let rows = pairs.get("rows").and_then(|r| r.parse().ok()).unwrap_or(20);
            let items: Vec<Value> = self.search(&q, rows).into_iter().map(crossref_json).collect();
            return self.respond(200, json!({"status": "ok", "message": {"items": items}}));
        }
        self.respond(404, json!({"status": "not found"}))
    }
}
