use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
    /// When the body was obtained from the origin.
    pub fetched_at: DateTime<Utc>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("network access disabled")]
    Offline,
    #[error("no recorded response for {0}")]
    NoRecording(String),
    #[error("network error: {0}")]
    Network(String),
}

/// The single boundary through which every aggregator request passes.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str, user_agent: &str) -> Result<HttpResponse, TransportError>;

    /// Whether this transport can open network connections.
    fn opens_network(&self) -> bool {
        false
    }
}

/// Refuses every request. Counts attempts so tests can assert none were made.
#[derive(Debug, Default)]
pub struct OfflineTransport {
    attempts: AtomicUsize,
}

impl OfflineTransport {
    pub fn attempts(&self) -> usize {
        self.attempts.load(Ordering::SeqCst)
    }
}

impl Transport for OfflineTransport {
    fn get(&self, _url: &str, _user_agent: &str) -> Result<HttpResponse, TransportError> {
        self.attempts.fetch_add(1, Ordering::SeqCst);
        Err(TransportError::Offline)
    }
}

/// One recorded request/response pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedExchange {
    pub url: String,
    pub status: u16,
    pub body: String,
    pub recorded_at: DateTime<Utc>,
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("reading fixture {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing fixture {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// Serves recorded exchanges by exact URL; never touches the network.
#[derive(Debug, Default)]
pub struct ReplayTransport {
    exchanges: HashMap<String, RecordedExchange>,
    requested: Mutex<Vec<String>>,
}

impl ReplayTransport {
    pub fn new(exchanges: impl IntoIterator<Item = RecordedExchange>) -> Self {
        Self { exchanges: exchanges.into_iter().map(|e| (e.url.clone(), e)).collect(), requested: Mutex::default() }
    }

    /// Loads every `*.json` file in `dir`; each holds one exchange or an array of them.
    pub fn from_dir(dir: &Path) -> Result<Self, FixtureError> {
        let mut all = Vec::new();
        let read = std::fs::read_dir(dir).map_err(|source| FixtureError::Io { path: dir.to_owned(), source })?;
        let mut paths: Vec<PathBuf> = read
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path).map_err(|source| FixtureError::Io { path: path.clone(), source })?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|source| FixtureError::Json { path: path.clone(), source })?;
            let parsed = if value.is_array() {
                serde_json::from_value::<Vec<RecordedExchange>>(value)
            } else {
                serde_json::from_value::<RecordedExchange>(value).map(|e| vec![e])
            };
            all.extend(parsed.map_err(|source| FixtureError::Json { path: path.clone(), source })?);
        }
        Ok(Self::new(all))
    }

    pub fn insert(&mut self, exchange: RecordedExchange) {
        self.exchanges.insert(exchange.url.clone(), exchange);
    }

    pub fn len(&self) -> usize {
        self.exchanges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exchanges.is_empty()
    }

    /// URLs requested so far, in order.
    pub fn requested(&self) -> Vec<String> {
        self.requested.lock().clone()
    }
}

impl Transport for ReplayTransport {
    fn get(&self, url: &str, _user_agent: &str) -> Result<HttpResponse, TransportError> {
        self.requested.lock().push(url.to_owned());
        self.exchanges
            .get(url)
            .map(|e| HttpResponse { status: e.status, body: e.body.clone(), fetched_at: e.recorded_at })
            .ok_or_else(|| TransportError::NoRecording(url.to_owned()))
    }
}

/// Wraps another transport and appends every exchange to a fixture file.
pub struct RecordingTransport<T> {
    inner: T,
    out: PathBuf,
    recorded: Mutex<Vec<RecordedExchange>>,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, out: impl Into<PathBuf>) -> Self {
        Self { inner, out: out.into(), recorded: Mutex::default() }
    }

    fn flush(&self, all: &[RecordedExchange]) {
        match serde_json::to_string_pretty(all) {
            Ok(json) => {
                if let Err(e) = std::fs::write(&self.out, json) {
                    tracing::warn!(path = %self.out.display(), "writing fixture recording failed: {e}");
                }
            }
            Err(e) => tracing::warn!("serializing fixture recording failed: {e}"),
        }
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn get(&self, url: &str, user_agent: &str) -> Result<HttpResponse, TransportError> {
        let resp = self.inner.get(url, user_agent)?;
        let mut recorded = self.recorded.lock();
        recorded.push(RecordedExchange {
            url: url.to_owned(),
            status: resp.status,
            body: resp.body.clone(),
            recorded_at: resp.fetched_at,
        });
        self.flush(&recorded);
        Ok(resp)
    }

    fn opens_network(&self) -> bool {
        self.inner.opens_network()
    }
}

#[cfg(feature = "http")]
pub use http::HttpTransport;

#[cfg(feature = "http")]
mod http {
    use std::time::Duration;

    use super::{HttpResponse, Transport, TransportError};

    /// Live HTTPS transport.
    pub struct HttpTransport {
        client: reqwest::blocking::Client,
    }

    impl HttpTransport {
        pub fn new(timeout: Duration) -> Result<Self, TransportError> {
            let client = reqwest::blocking::Client::builder()
                .timeout(timeout)
                .build()
                .map_err(|e| TransportError::Network(e.to_string()))?;
            Ok(Self { client })
        }
    }

    impl Transport for HttpTransport {
        fn get(&self, url: &str, user_agent: &str) -> Result<HttpResponse, TransportError> {
            let resp = self
                .client
                .get(url)
                .header(reqwest::header::USER_AGENT, user_agent)
                .send()
                .map_err(|e| TransportError::Network(e.to_string()))?;
            let status = resp.status().as_u16();
            let body = resp.text().map_err(|e| TransportError::Network(e.to_string()))?;
            Ok(HttpResponse { status, body, fetched_at: chrono::Utc::now() })
        }

        fn opens_network(&self) -> bool {
            true
        }
    }
}
