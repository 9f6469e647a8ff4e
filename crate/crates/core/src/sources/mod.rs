//! Scholarly metadata aggregator clients with rate limiting, retries and a durable cache.

mod cache;
mod clients;
mod ratelimit;
mod search;
mod transport;
mod types;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parse::{is_valid_doi, ParsedReference};

pub use cache::{Cache, CacheEntry, CacheError, CacheHeader, CacheKey, DEFAULT_TTL};
pub use clients::{arxiv_lookup_url, doi_lookup_url, parse_payload, split_arxiv_version, title_search_url, PayloadError};
pub use ratelimit::{Clock, RateLimit, RateLimiter, SimulatedClock, SystemClock};
pub use search::{search_all, IdLookup, QueryMode, SearchError, SearchOutcome, SearchPlan, SourceTrace, TraceStatus};
#[cfg(feature = "http")]
pub use transport::HttpTransport;
pub use transport::{
    FixtureError, HttpResponse, OfflineTransport, RecordedExchange, RecordingTransport, ReplayTransport, Transport,
    TransportError,
};
pub use types::{ArxivVersion, CandidateMatch, MetadataRecord, SourceId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SourceError {
    #[error("{aggregator} unavailable: {detail}")]
    SourceUnavailable { aggregator: SourceId, detail: String },
    #[error("{aggregator} kept throttling requests")]
    RateLimited { aggregator: SourceId },
    #[error("`{0}` is not a syntactically valid DOI")]
    InvalidDoi(String),
    #[error("reference has no title, DOI or arXiv ID to search with")]
    NothingToQuery,
    #[error("{aggregator} returned an unreadable payload: {detail}")]
    BadPayload { aggregator: SourceId, detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourcesConfig {
    /// Contact string sent in the User-Agent (an email address, typically).
    pub contact: Option<String>,
    pub max_results: usize,
    pub rate_limits: BTreeMap<SourceId, RateLimit>,
    pub default_rate_limit: RateLimit,
    pub cache_ttl_secs: u64,
    /// Ignore cached responses (still writes fresh ones).
    pub refresh: bool,
    /// Serve expired cache entries too (offline runs, where nothing fresher exists).
    pub serve_stale: bool,
    pub jitter_seed: u64,
}

impl Default for SourcesConfig {
    fn default() -> Self {
        Self {
            contact: None,
            max_results: 5,
            rate_limits: BTreeMap::new(),
            default_rate_limit: RateLimit::default(),
            cache_ttl_secs: DEFAULT_TTL.as_secs(),
            refresh: false,
            serve_stale: false,
            jitter_seed: 0x5eed,
        }
    }
}

impl SourcesConfig {
    pub fn rate_limit(&self, source: SourceId) -> RateLimit {
        self.rate_limits.get(&source).copied().unwrap_or(self.default_rate_limit)
    }
}

/// A fetched (or cached) response body.
#[derive(Debug, Clone)]
struct Fetched {
    status: u16,
    body: String,
    fetched_at: chrono::DateTime<chrono::Utc>,
}

/// Shared client over all aggregators. Cheap to share between threads.
pub struct SourceClient {
    transport: Arc<dyn Transport>,
    cache: Option<Arc<Cache>>,
    clock: Arc<dyn Clock>,
    limiters: BTreeMap<SourceId, RateLimiter>,
    config: SourcesConfig,
    network_requests: AtomicUsize,
    transport_requests: AtomicUsize,
}

impl SourceClient {
    pub fn new(
        transport: Arc<dyn Transport>,
        cache: Option<Arc<Cache>>,
        clock: Arc<dyn Clock>,
        config: SourcesConfig,
    ) -> Self {
        let limiters = SourceId::ALL
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, RateLimiter::new(config.rate_limit(s), config.jitter_seed.wrapping_add(i as u64))))
            .collect();
        Self {
            transport,
            cache,
            clock,
            limiters,
            config,
            network_requests: AtomicUsize::new(0),
            transport_requests: AtomicUsize::new(0),
        }
    }

    pub fn config(&self) -> &SourcesConfig {
        &self.config
    }

    pub fn limiter(&self, source: SourceId) -> &RateLimiter {
        &self.limiters[&source]
    }

    /// Requests that went through a network-capable transport.
    pub fn network_requests(&self) -> usize {
        self.network_requests.load(Ordering::SeqCst)
    }

    /// Requests that reached the transport (cache misses).
    pub fn transport_requests(&self) -> usize {
        self.transport_requests.load(Ordering::SeqCst)
    }

    fn user_agent(&self) -> String {
        match &self.config.contact {
            Some(c) => format!("citeverify/{} (mailto:{c})", env!("CARGO_PKG_VERSION")),
            None => format!("citeverify/{}", env!("CARGO_PKG_VERSION")),
        }
    }

    /// GET through cache, rate limiter and retry loop. 404 is a normal response.
    fn fetch(&self, source: SourceId, url: &str) -> Result<Fetched, SourceError> {
        let key = CacheKey::new(source, url);
        if let (Some(cache), false) = (&self.cache, self.config.refresh) {
            let hit = match cache.get(&key) {
                Some(hit) => Some(hit),
                None if self.config.serve_stale => cache.read_entry(&key.digest).ok().flatten(),
                None => None,
            };
            if let Some(hit) = hit {
                return Ok(Fetched { status: hit.header.status, body: hit.payload, fetched_at: hit.header.stored_at });
            }
        }

        let limiter = &self.limiters[&source];
        let limit = *limiter.limit();
        let ua = self.user_agent();
        let mut last_err = None;
        for attempt in 0..=limit.retries {
            if attempt > 0 {
                self.clock.sleep(limit.backoff(attempt - 1));
            }
            limiter.acquire(self.clock.as_ref());
            self.transport_requests.fetch_add(1, Ordering::SeqCst);
            if self.transport.opens_network() {
                self.network_requests.fetch_add(1, Ordering::SeqCst);
            }
            match self.transport.get(url, &ua) {
                Ok(resp) if resp.status == 200 || resp.status == 404 || resp.status == 410 => {
                    let status = if resp.status == 410 { 404 } else { resp.status };
                    if let Some(cache) = &self.cache {
                        let ttl = Duration::from_secs(self.config.cache_ttl_secs);
                        if let Err(e) = cache.put_at(&key, status, &resp.body, ttl, resp.fetched_at) {
                            tracing::warn!(%source, "cache write failed: {e}");
                        }
                    }
                    return Ok(Fetched { status, body: resp.body, fetched_at: resp.fetched_at });
                }
                Ok(resp) if resp.status == 429 || resp.status == 403 => {
                    last_err = Some(SourceError::RateLimited { aggregator: source });
                }
                Ok(resp) if resp.status >= 500 => {
                    last_err = Some(SourceError::SourceUnavailable { aggregator: source, detail: format!("HTTP {}", resp.status) });
                }
                Ok(resp) => {
                    return Err(SourceError::SourceUnavailable { aggregator: source, detail: format!("HTTP {}", resp.status) });
                }
                // Offline and missing recordings will not change on retry.
                Err(e @ (TransportError::Offline | TransportError::NoRecording(_))) => {
                    return Err(SourceError::SourceUnavailable { aggregator: source, detail: e.to_string() });
                }
                Err(e) => last_err = Some(SourceError::SourceUnavailable { aggregator: source, detail: e.to_string() }),
            }
        }
        Err(last_err.unwrap_or(SourceError::SourceUnavailable { aggregator: source, detail: "no attempts".into() }))
    }

    fn fetch_records(&self, source: SourceId, url: &str) -> Result<Vec<MetadataRecord>, SourceError> {
        let f = self.fetch(source, url)?;
        if f.status == 404 {
            return Ok(Vec::new());
        }
        parse_payload(source, &f.body, f.fetched_at)
            .map_err(|e| SourceError::BadPayload { aggregator: source, detail: e.detail })
    }

    /// Looks a DOI up on one source.
    pub fn lookup_doi(&self, source: SourceId, doi: &str) -> Result<Option<MetadataRecord>, SourceError> {
        if !is_valid_doi(doi) {
            return Err(SourceError::InvalidDoi(doi.to_owned()));
        }
        let Some(url) = doi_lookup_url(source, doi) else { return Ok(None) };
        let records = self.fetch_records(source, &url)?;
        Ok(records.into_iter().find(|r| r.doi.as_deref().is_some_and(|d| d.eq_ignore_ascii_case(doi))))
    }

    /// Registered metadata for a DOI: Crossref first, then OpenAlex (which also covers DataCite).
    pub fn resolve_doi(&self, doi: &str) -> Result<Option<MetadataRecord>, SourceError> {
        let doi = crate::parse::normalize_doi(doi);
        if !is_valid_doi(&doi) {
            return Err(SourceError::InvalidDoi(doi));
        }
        let mut last_err = None;
        for source in [SourceId::Crossref, SourceId::Openalex] {
            match self.lookup_doi(source, &doi) {
                Ok(Some(r)) => return Ok(Some(r)),
                Ok(None) => last_err = None,
                Err(e) => last_err = Some(e),
            }
        }
        match last_err {
            Some(e) => Err(e),
            None => Ok(None),
        }
    }

    /// Latest arXiv record with every earlier version's title and authors attached.
    pub fn lookup_arxiv(&self, id: &str) -> Result<Option<MetadataRecord>, SourceError> {
        let Some(mut latest) = self.fetch_records(SourceId::Arxiv, &arxiv_lookup_url(id, None))?.into_iter().next()
        else {
            return Ok(None);
        };
        let latest_version = latest.arxiv_versions.as_ref().and_then(|v| v.first()).map_or(1, |v| v.version);
        let mut versions = Vec::new();
        for v in 1..latest_version {
            let older = self.fetch_records(SourceId::Arxiv, &arxiv_lookup_url(id, Some(v)))?;
            if let Some(rec) = older.into_iter().next() {
                versions.push(ArxivVersion { version: v, title: rec.title, authors: rec.authors });
            }
        }
        versions.extend(latest.arxiv_versions.take().unwrap_or_default());
        latest.arxiv_versions = Some(versions);
        Ok(Some(latest))
    }

    /// Title search on one source, at most `max_results` records.
    pub fn search_title(&self, source: SourceId, title: &str) -> Result<Vec<MetadataRecord>, SourceError> {
        let mut records = self.fetch_records(source, &title_search_url(source, title, self.config.max_results))?;
        records.truncate(self.config.max_results);
        Ok(records)
    }

    /// Queries one source: identifier lookup when the reference carries an identifier
    /// that source can resolve, else a title search.
    pub fn query_source(&self, source: SourceId, reference: &ParsedReference) -> Result<Vec<MetadataRecord>, SourceError> {
        let ids = &reference.identifiers;
        if let Some(doi) = &ids.doi {
            if doi_lookup_url(source, doi).is_some() {
                return Ok(self.lookup_doi(source, doi)?.into_iter().collect());
            }
        }
        if let (SourceId::Arxiv, Some(id)) = (source, &ids.arxiv_id) {
            return Ok(self.lookup_arxiv(id)?.into_iter().collect());
        }
        match &reference.title {
            Some(t) => self.search_title(source, t),
            None if ids.doi.is_some() || ids.arxiv_id.is_some() => Ok(Vec::new()),
            None => Err(SourceError::NothingToQuery),
        }
    }
}
