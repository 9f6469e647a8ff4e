//! Durable response cache: one file per entry, named by the hex digest of
//! (source, canonical query), holding a JSON header line followed by the payload.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::ratelimit::Clock;
use super::SourceId;

pub const DEFAULT_TTL: Duration = Duration::from_secs(30 * 24 * 3600);

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache entry {0} is corrupt")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub digest: String,
    pub source: SourceId,
    pub query: String,
}

impl CacheKey {
    pub fn new(source: SourceId, query: &str) -> Self {
        let mut h = Sha256::new();
        h.update(source.as_str().as_bytes());
        h.update(b"\n");
        h.update(query.as_bytes());
        Self { digest: hex::encode(h.finalize()), source, query: query.to_owned() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub source: SourceId,
    pub query: String,
    pub stored_at: DateTime<Utc>,
    pub ttl_secs: u64,
    pub status: u16,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub header: CacheHeader,
    pub payload: String,
}

impl CacheEntry {
    pub fn expired_at(&self, now: DateTime<Utc>) -> bool {
        let ttl = chrono::Duration::seconds(self.header.ttl_secs.min(i64::MAX as u64) as i64);
        now >= self.header.stored_at + ttl
    }
}

fn checksum(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

pub struct Cache {
    dir: PathBuf,
    clock: Arc<dyn Clock>,
    write_lock: Mutex<()>,
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>, clock: Arc<dyn Clock>) -> Result<Self, CacheError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, clock, write_lock: Mutex::new(()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, digest: &str) -> PathBuf {
        self.dir.join(digest)
    }

    /// Reads an entry regardless of expiry. Corrupt entries are evicted.
    pub fn read_entry(&self, digest: &str) -> Result<Option<CacheEntry>, CacheError> {
        let path = self.path(digest);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let parsed = text.split_once('\n').and_then(|(head, payload)| {
            let header: CacheHeader = serde_json::from_str(head).ok()?;
            (header.checksum == checksum(payload)).then(|| CacheEntry { header, payload: payload.to_owned() })
        });
        match parsed {
            Some(entry) => Ok(Some(entry)),
            None => {
                tracing::warn!(digest, "evicting corrupt cache entry");
                let _guard = self.write_lock.lock();
                let _ = std::fs::remove_file(&path);
                Err(CacheError::Corrupt(digest.to_owned()))
            }
        }
    }

    /// Live entry for `key`, or `None` on a miss, expiry or corruption.
    pub fn get(&self, key: &CacheKey) -> Option<CacheEntry> {
        match self.read_entry(&key.digest) {
            Ok(Some(entry)) if !entry.expired_at(self.clock.wall()) => Some(entry),
            Ok(_) => None,
            Err(e) => {
                tracing::debug!("cache miss: {e}");
                None
            }
        }
    }

    pub fn put(&self, key: &CacheKey, status: u16, payload: &str, ttl: Duration) -> Result<(), CacheError> {
        self.put_at(key, status, payload, ttl, self.clock.wall())
    }

    /// Stores with an explicit `stored_at` (the time the payload was fetched).
    pub fn put_at(
        &self,
        key: &CacheKey,
        status: u16,
        payload: &str,
        ttl: Duration,
        stored_at: DateTime<Utc>,
    ) -> Result<(), CacheError> {
        let header = CacheHeader {
            source: key.source,
            query: key.query.clone(),
            stored_at,
            ttl_secs: ttl.as_secs(),
            status,
            checksum: checksum(payload),
        };
        let head = serde_json::to_string(&header).map_err(|e| CacheError::Corrupt(e.to_string()))?;
        let _guard = self.write_lock.lock();
        let tmp = self.dir.join(format!(".{}.tmp", key.digest));
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(head.as_bytes())?;
            f.write_all(b"\n")?;
            f.write_all(payload.as_bytes())?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, self.path(&key.digest))?;
        Ok(())
    }

    /// All readable entries, sorted by digest.
    pub fn entries(&self) -> Result<Vec<(String, CacheEntry)>, CacheError> {
        let mut out = Vec::new();
        for e in std::fs::read_dir(&self.dir)? {
            let name = e?.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') {
                continue;
            }
            if let Ok(Some(entry)) = self.read_entry(&name) {
                out.push((name, entry));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    pub fn evict(&self, digest: &str) -> Result<bool, CacheError> {
        let _guard = self.write_lock.lock();
        match std::fs::remove_file(self.path(digest)) {
            Ok(()) => Ok(true),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(false),
            Err(e) => Err(e.into()),
        }
    }

    /// Removes expired entries; returns how many were removed.
    pub fn evict_expired(&self) -> Result<usize, CacheError> {
        let now = self.clock.wall();
        let mut n = 0;
        for (digest, entry) in self.entries()? {
            if entry.expired_at(now) && self.evict(&digest)? {
                n += 1;
            }
        }
        Ok(n)
    }

    pub fn evict_all(&self) -> Result<usize, CacheError> {
        let mut n = 0;
        for (digest, _) in self.entries()? {
            if self.evict(&digest)? {
                n += 1;
            }
        }
        Ok(n)
    }
}
