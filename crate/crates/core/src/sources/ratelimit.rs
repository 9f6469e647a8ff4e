use std::time::Duration;

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Time source for rate limiting, retries and cache expiry.
pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary origin.
    fn elapsed(&self) -> Duration;
    fn sleep(&self, d: Duration);
    fn wall(&self) -> DateTime<Utc>;
}

#[derive(Debug)]
pub struct SystemClock {
    origin: std::time::Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self { origin: std::time::Instant::now() }
    }
}

impl Clock for SystemClock {
    fn elapsed(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }

    fn wall(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// A clock that only moves when something sleeps on it.
#[derive(Debug)]
pub struct SimulatedClock {
    start: DateTime<Utc>,
    now: Mutex<Duration>,
}

impl SimulatedClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        Self { start, now: Mutex::new(Duration::ZERO) }
    }

    pub fn advance(&self, d: Duration) {
        *self.now.lock() += d;
    }
}

impl Default for SimulatedClock {
    fn default() -> Self {
        Self::new(DateTime::<Utc>::UNIX_EPOCH)
    }
}

impl Clock for SimulatedClock {
    fn elapsed(&self) -> Duration {
        *self.now.lock()
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }

    fn wall(&self) -> DateTime<Utc> {
        self.start + chrono::Duration::from_std(self.elapsed()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateLimit {
    pub requests_per_second: f64,
    /// Upper bound of the random delay added after the minimum interval.
    pub jitter_ms: u64,
    pub retries: u32,
    pub backoff_initial_ms: u64,
}

impl Default for RateLimit {
    fn default() -> Self {
        Self { requests_per_second: 1.0, jitter_ms: 250, retries: 3, backoff_initial_ms: 2000 }
    }
}

impl RateLimit {
    pub fn min_interval(&self) -> Duration {
        Duration::from_secs_f64(1.0 / self.requests_per_second.max(1e-6))
    }

    /// Delay before retry `attempt` (0-based): initial, 2x, 4x, ...
    pub fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.backoff_initial_ms.saturating_mul(1u64 << attempt.min(16)))
    }
}

struct LimiterState {
    next_allowed: Option<Duration>,
    rng: ChaCha8Rng,
    log: Vec<Duration>,
}

/// Spaces requests to one source at least `1 / requests_per_second` apart, plus jitter.
///
/// The lock is held while waiting, so concurrent callers are served one at a time.
pub struct RateLimiter {
    limit: RateLimit,
    state: Mutex<LimiterState>,
}

impl RateLimiter {
    pub fn new(limit: RateLimit, seed: u64) -> Self {
        Self {
            limit,
            state: Mutex::new(LimiterState { next_allowed: None, rng: ChaCha8Rng::seed_from_u64(seed), log: Vec::new() }),
        }
    }

    pub fn limit(&self) -> &RateLimit {
        &self.limit
    }

    /// Blocks on `clock` until a request may be sent, then records it.
    pub fn acquire(&self, clock: &dyn Clock) {
        let mut st = self.state.lock();
        if let Some(next) = st.next_allowed {
            let now = clock.elapsed();
            if now < next {
                clock.sleep(next - now);
            }
        }
        let sent = clock.elapsed();
        st.log.push(sent);
        let jitter = if self.limit.jitter_ms > 0 { st.rng.gen_range(0..=self.limit.jitter_ms) } else { 0 };
        st.next_allowed = Some(sent + self.limit.min_interval() + Duration::from_millis(jitter));
    }

    /// Times at which requests were released.
    pub fn request_log(&self) -> Vec<Duration> {
        self.state.lock().log.clone()
    }
}
