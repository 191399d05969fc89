//! Overview cache: TTL entries, single-flight composition, user-driven
//! priming and a periodic refresh of popular and primed keys.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::domain::Timestamp;
use crate::query::{canonicalize, parse_query};
use crate::themes::{Overview, DEFAULT_MAX_THEMES, DEFAULT_P_SUBCLUSTERS};

pub const DEFAULT_TTL_SECONDS: i64 = 30 * 60;
pub const DEFAULT_PRIMING_SECONDS: i64 = 24 * 3600;
pub const DEFAULT_REFRESH_INTERVAL_SECONDS: i64 = 30 * 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheConfig {
    pub ttl_seconds: i64,
    pub priming_seconds: i64,
    pub refresh_interval_seconds: i64,
}

impl Default for CacheConfig {
    fn default() -> Self {
        CacheConfig {
            ttl_seconds: DEFAULT_TTL_SECONDS,
            priming_seconds: DEFAULT_PRIMING_SECONDS,
            refresh_interval_seconds: DEFAULT_REFRESH_INTERVAL_SECONDS,
        }
    }
}

impl CacheConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.ttl_seconds <= 0 || self.priming_seconds <= 0 || self.refresh_interval_seconds <= 0 {
            return Err("cache durations must be positive".into());
        }
        Ok(())
    }
}

/// A request shape. The query must already be in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey {
    pub query_canonical: String,
    pub horizon_seconds: i64,
    pub max_themes: usize,
    pub stories_per_theme: usize,
}

impl CacheKey {
    pub fn new(query_canonical: impl Into<String>, horizon_seconds: i64) -> Self {
        CacheKey {
            query_canonical: query_canonical.into(),
            horizon_seconds,
            max_themes: DEFAULT_MAX_THEMES,
            stories_per_theme: DEFAULT_P_SUBCLUSTERS,
        }
    }

    pub fn with_shape(mut self, max_themes: usize, stories_per_theme: usize) -> Self {
        self.max_themes = max_themes;
        self.stories_per_theme = stories_per_theme;
        self
    }
}

#[derive(Debug, Clone)]
pub struct CacheEntry {
    pub overview: Arc<Overview>,
    pub stored_at: Timestamp,
    pub expires_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimingRecord {
    pub key: CacheKey,
    pub primed_until: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub hit_ratio: f64,
    pub entries: usize,
    pub primed: usize,
    pub composes: u64,
    pub mean_compose_ms: f64,
}

type FlightResult<E> = Option<Result<Arc<Overview>, E>>;

struct Flight<E> {
    result: Mutex<FlightResult<E>>,
    done: Condvar,
}

struct State<E> {
    entries: HashMap<CacheKey, CacheEntry>,
    priming: HashMap<CacheKey, PrimingRecord>,
    inflight: HashMap<CacheKey, Arc<Flight<E>>>,
    hits: u64,
    misses: u64,
    composes: u64,
    compose_micros: u128,
}

/// Thread-safe overview cache. `E` is the composer's error type; followers
/// of a failed flight receive a clone of the error.
pub struct OverviewCache<E = String> {
    config: CacheConfig,
    popular: Vec<CacheKey>,
    state: Mutex<State<E>>,
}

impl<E: Clone> OverviewCache<E> {
    pub fn new(config: CacheConfig) -> Self {
        Self::with_popular(config, Vec::new())
    }

    pub fn with_popular(config: CacheConfig, popular: Vec<CacheKey>) -> Self {
        OverviewCache {
            config,
            popular,
            state: Mutex::new(State {
                entries: HashMap::new(),
                priming: HashMap::new(),
                inflight: HashMap::new(),
                hits: 0,
                misses: 0,
                composes: 0,
                compose_micros: 0,
            }),
        }
    }

    pub fn config(&self) -> &CacheConfig {
        &self.config
    }

    pub fn popular(&self) -> &[CacheKey] {
        &self.popular
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State<E>> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Returns the cached overview when fresh (`hit = true`); otherwise
    /// composes it once, even under concurrent callers, stores it and primes
    /// the key. Failures are returned to every waiting caller and not stored.
    pub fn get_or_compose<F>(&self, key: &CacheKey, now: Timestamp, composer: F) -> Result<(Arc<Overview>, bool), E>
    where
        F: FnOnce() -> Result<Overview, E>,
    {
        let flight = {
            let mut state = self.lock();
            if let Some(entry) = state.entries.get(key).filter(|e| now < e.expires_at) {
                let overview = entry.overview.clone();
                state.hits += 1;
                return Ok((overview, true));
            }
            state.misses += 1;
            if let Some(flight) = state.inflight.get(key).cloned() {
                drop(state);
                let mut result = flight.result.lock().unwrap_or_else(|p| p.into_inner());
                while result.is_none() {
                    result = flight.done.wait(result).unwrap_or_else(|p| p.into_inner());
                }
                return result.clone().expect("flight finished").map(|o| (o, false));
            }
            let flight = Arc::new(Flight { result: Mutex::new(None), done: Condvar::new() });
            state.inflight.insert(key.clone(), flight.clone());
            flight
        };

        let started = Instant::now();
        let outcome = composer().map(Arc::new);
        let elapsed = started.elapsed().as_micros();

        {
            let mut state = self.lock();
            state.inflight.remove(key);
            state.composes += 1;
            state.compose_micros += elapsed;
            if let Ok(overview) = &outcome {
                state.entries.insert(key.clone(), self.entry(overview.clone(), now));
                let until = now + self.config.priming_seconds;
                let record =
                    state.priming.entry(key.clone()).or_insert(PrimingRecord { key: key.clone(), primed_until: until });
                record.primed_until = record.primed_until.max(until);
            }
        }
        *flight.result.lock().unwrap_or_else(|p| p.into_inner()) = Some(outcome.clone());
        flight.done.notify_all();
        outcome.map(|o| (o, false))
    }

    fn entry(&self, overview: Arc<Overview>, now: Timestamp) -> CacheEntry {
        CacheEntry { overview, stored_at: now, expires_at: now + self.config.ttl_seconds }
    }

    /// Recomposes every popular key and every key still primed at `now`,
    /// dropping expired priming records. Returns the number recomposed.
    pub fn refresh_tick<F>(&self, now: Timestamp, mut composer: F) -> usize
    where
        F: FnMut(&CacheKey) -> Result<Overview, E>,
        E: std::fmt::Display,
    {
        let keys: BTreeSet<CacheKey> = {
            let mut state = self.lock();
            state.priming.retain(|_, r| r.primed_until > now);
            self.popular.iter().cloned().chain(state.priming.keys().cloned()).collect()
        };
        let mut refreshed = 0;
        for key in keys {
            let started = Instant::now();
            let outcome = composer(&key);
            let elapsed = started.elapsed().as_micros();
            let mut state = self.lock();
            state.composes += 1;
            state.compose_micros += elapsed;
            match outcome {
                Ok(overview) => {
                    state.entries.insert(key, self.entry(Arc::new(overview), now));
                    refreshed += 1;
                }
                Err(e) => log::warn!("refresh of {:?} failed: {e}", key.query_canonical),
            }
        }
        refreshed
    }

    pub fn entry_for(&self, key: &CacheKey) -> Option<CacheEntry> {
        self.lock().entries.get(key).cloned()
    }

    pub fn priming_for(&self, key: &CacheKey) -> Option<PrimingRecord> {
        self.lock().priming.get(key).cloned()
    }

    pub fn stats(&self) -> CacheStats {
        let state = self.lock();
        let total = state.hits + state.misses;
        CacheStats {
            hits: state.hits,
            misses: state.misses,
            hit_ratio: if total == 0 { 0.0 } else { state.hits as f64 / total as f64 },
            entries: state.entries.len(),
            primed: state.priming.len(),
            composes: state.composes,
            mean_compose_ms: if state.composes == 0 {
                0.0
            } else {
                state.compose_micros as f64 / state.composes as f64 / 1000.0
            },
        }
    }
}

/// Parses a popular-keys file: one `query<TAB>horizon_seconds` per line.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_popular_keys(text: &str) -> Result<Vec<CacheKey>, crate::Error> {
    let mut keys = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| crate::Error::Config(format!("popular keys line {}: {msg}", n + 1));
        let (query, horizon) = line.rsplit_once('\t').ok_or_else(|| bad("expected query<TAB>horizon_seconds"))?;
        let horizon: i64 = horizon.trim().parse().map_err(|_| bad("horizon is not an integer"))?;
        if horizon <= 0 {
            return Err(bad("horizon must be positive"));
        }
        let ast = parse_query(query).map_err(|e| bad(&e.to_string()))?;
        keys.push(CacheKey::new(canonicalize(&ast), horizon));
    }
    Ok(keys)
}
