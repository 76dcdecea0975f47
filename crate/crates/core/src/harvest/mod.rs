//! Networked client for a paginated search/fetch endpoint with rate
//! limiting, exponential backoff, resumable cursors, and an offline
//! fixture mode. A scripted mock server lives in [`mock`].

mod clock;
pub mod mock;
mod url;

pub use clock::{Clock, FakeClock, SystemClock};
pub use url::{percent_decode, percent_encode};

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::SourceDb;

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("endpoint returned status {status}: {detail}")]
    NonTransient { status: u16, detail: String },
    #[error("retries exhausted after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("no endpoint or fixture directory configured")]
    NotConfigured,
    #[error("fixture {0} missing")]
    FixtureMissing(String),
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarvestError>;

/// One harvest: a query against one database with paging, retry, and
/// rate-limit parameters. The cursor file makes the job resumable.
#[derive(Debug, Clone)]
pub struct HarvestJob {
    pub query_text: String,
    pub source_db: SourceDb,
    pub page_size: usize,
    pub cursor_path: PathBuf,
    pub max_retries: u32,
    /// Requests per second; the limiter enforces the implied minimum
    /// spacing between consecutive requests.
    pub rate_limit: f64,
}

/// Persisted resume point, written atomically after every completed page.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
struct Cursor {
    retstart: usize,
}

fn read_cursor(path: &Path) -> Cursor {
    std::fs::read_to_string(path)
        .ok()
        .and_then(|text| serde_json::from_str(&text).ok())
        .unwrap_or_default()
}

fn write_cursor(path: &Path, cursor: &Cursor) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_string(cursor).expect("cursor serialises"))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug)]
pub struct TransportResponse {
    pub status: u16,
    pub body: Vec<u8>,
    /// Ids the endpoint reported as unknown (x-missing-ids header).
    pub missing_ids: Vec<String>,
}

#[derive(Debug, Clone, Error)]
pub enum TransportError {
    #[error("timeout")]
    Timeout,
    #[error("connect: {0}")]
    Connect(String),
    #[error("{0}")]
    Other(String),
}

/// Transport seam: HTTP in production, canned bytes in fixture mode,
/// scripts in unit tests.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> std::result::Result<TransportResponse, TransportError>;
}

struct HttpTransport {
    agent: ureq::Agent,
    api_key: Option<String>,
}

impl HttpTransport {
    fn new(timeout: Duration, api_key: Option<String>) -> HttpTransport {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        HttpTransport {
            agent: config.into(),
            api_key,
        }
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> std::result::Result<TransportResponse, TransportError> {
        let mut request = self.agent.get(url);
        if let Some(key) = &self.api_key {
            request = request.header("x-api-key", key);
        }
        match request.call() {
            Ok(mut response) => {
                let status = response.status().as_u16();
                let missing_ids = response
                    .headers()
                    .get("x-missing-ids")
                    .and_then(|v| v.to_str().ok())
                    .map(|v| v.split(',').map(str::to_string).collect())
                    .unwrap_or_default();
                let body = response
                    .body_mut()
                    .read_to_vec()
                    .map_err(|e| TransportError::Other(e.to_string()))?;
                Ok(TransportResponse {
                    status,
                    body,
                    missing_ids,
                })
            }
            Err(ureq::Error::Timeout(_)) => Err(TransportError::Timeout),
            Err(ureq::Error::Io(e)) if e.kind() == std::io::ErrorKind::TimedOut => {
                Err(TransportError::Timeout)
            }
            Err(ureq::Error::Io(e)) => Err(TransportError::Connect(e.to_string())),
            Err(e) => Err(TransportError::Other(e.to_string())),
        }
    }
}

/// Offline mode: responses come from a directory of canned files keyed by
/// a hash of the request path and query.
struct FixtureTransport {
    dir: PathBuf,
}

/// File name a request maps to in fixture mode.
pub fn fixture_key(path_and_query: &str) -> String {
    // FNV-1a, hex; stable across runs and platforms.
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in path_and_query.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    format!("{hash:016x}.bin")
}

impl Transport for FixtureTransport {
    fn get(&self, url: &str) -> std::result::Result<TransportResponse, TransportError> {
        let path_and_query = url
            .find("://")
            .and_then(|scheme| url[scheme + 3..].find('/').map(|p| &url[scheme + 3 + p..]))
            .unwrap_or(url);
        let file = self.dir.join(fixture_key(path_and_query));
        match std::fs::read(&file) {
            Ok(body) => Ok(TransportResponse {
                status: 200,
                body,
                missing_ids: Vec::new(),
            }),
            Err(_) => Err(TransportError::Other(format!(
                "fixture {} missing for {path_and_query}",
                file.display()
            ))),
        }
    }
}

/// Enforces the per-job request rate: consecutive requests are spaced at
/// least 1/rate apart.
struct RateLimiter {
    min_interval: Duration,
    last: Mutex<Option<Duration>>,
}

impl RateLimiter {
    fn new(rate_per_second: f64) -> RateLimiter {
        assert!(rate_per_second > 0.0, "rate limit must be positive");
        RateLimiter {
            min_interval: Duration::from_secs_f64(1.0 / rate_per_second),
            last: Mutex::new(None),
        }
    }

    fn acquire(&self, clock: &dyn Clock) {
        let mut last = self.last.lock().unwrap();
        let now = clock.now();
        if let Some(prev) = *last {
            let ready = prev + self.min_interval;
            if now < ready {
                clock.sleep(ready - now);
            }
        }
        *last = Some(clock.now());
    }
}

/// Client configuration: either a live endpoint or a fixture directory.
/// The endpoint can also come from the `ESTMAP_ENDPOINT` environment
/// variable.
pub struct HarvestConfig {
    pub endpoint: Option<String>,
    pub fixture_dir: Option<PathBuf>,
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Backoff base delay (doubles per retry, full jitter).
    pub backoff_base: Duration,
    /// Seed for the jitter; pinned for reproducible tests.
    pub seed: u64,
}

impl Default for HarvestConfig {
    fn default() -> HarvestConfig {
        HarvestConfig {
            endpoint: std::env::var("ESTMAP_ENDPOINT").ok(),
            fixture_dir: None,
            api_key: None,
            timeout: Duration::from_secs(10),
            backoff_base: Duration::from_millis(500),
            seed: 0,
        }
    }
}

pub struct HarvestClient {
    transport: Box<dyn Transport>,
    clock: Arc<dyn Clock>,
    endpoint: String,
    backoff_base: Duration,
    jitter: Mutex<ChaCha8Rng>,
    /// Transient failures retried so far, for reporting.
    retries_recorded: Mutex<u32>,
    /// One limiter per job (keyed by cursor path), shared across search
    /// and fetch so the whole job respects its rate.
    limiters: Mutex<std::collections::HashMap<PathBuf, Arc<RateLimiter>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub total: usize,
    pub pages: Vec<Vec<String>>,
    pub retries: u32,
    /// First page index fetched in this run (nonzero when resumed).
    pub resumed_from: usize,
}

#[derive(Debug, Default)]
pub struct FetchOutcome {
    pub payloads: Vec<Vec<u8>>,
    pub missing: Vec<String>,
    pub retries: u32,
}

impl HarvestClient {
    pub fn new(config: HarvestConfig) -> Result<HarvestClient> {
        Self::with_clock(config, Arc::new(SystemClock::new()))
    }

    pub fn with_clock(config: HarvestConfig, clock: Arc<dyn Clock>) -> Result<HarvestClient> {
        let (transport, endpoint): (Box<dyn Transport>, String) =
            if let Some(dir) = config.fixture_dir {
                (
                    Box::new(FixtureTransport { dir }),
                    "http://fixture.local".to_string(),
                )
            } else if let Some(endpoint) = config.endpoint {
                (
                    Box::new(HttpTransport::new(config.timeout, config.api_key)),
                    endpoint.trim_end_matches('/').to_string(),
                )
            } else {
                return Err(HarvestError::NotConfigured);
            };
        Ok(HarvestClient {
            transport,
            clock,
            endpoint,
            backoff_base: config.backoff_base,
            jitter: Mutex::new(ChaCha8Rng::seed_from_u64(config.seed)),
            retries_recorded: Mutex::new(0),
            limiters: Mutex::new(Default::default()),
        })
    }

    /// Test seam: custom transport + clock.
    pub fn with_transport(
        transport: Box<dyn Transport>,
        clock: Arc<dyn Clock>,
        backoff_base: Duration,
        seed: u64,
    ) -> HarvestClient {
        HarvestClient {
            transport,
            clock,
            endpoint: "http://test.local".to_string(),
            backoff_base,
            jitter: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
            retries_recorded: Mutex::new(0),
            limiters: Mutex::new(Default::default()),
        }
    }

    pub fn retries_recorded(&self) -> u32 {
        *self.retries_recorded.lock().unwrap()
    }

    fn limiter_for(&self, job: &HarvestJob) -> Arc<RateLimiter> {
        Arc::clone(
            self.limiters
                .lock()
                .unwrap()
                .entry(job.cursor_path.clone())
                .or_insert_with(|| Arc::new(RateLimiter::new(job.rate_limit))),
        )
    }

    /// Pages of record ids, in order. The cursor file is updated after
    /// every completed page, so a killed job resumes without re-fetching;
    /// on a failed run the cursor stays at the last completed page.
    pub fn search(&self, job: &HarvestJob) -> Result<SearchOutcome> {
        let limiter = self.limiter_for(job);
        let mut cursor = read_cursor(&job.cursor_path);
        let resumed_from = cursor.retstart;
        let mut pages = Vec::new();
        let mut total;
        let start_retries = self.retries_recorded();
        loop {
            let url = format!(
                "{}/search?db={}&term={}&retstart={}&retmax={}",
                self.endpoint,
                job.source_db,
                percent_encode(&job.query_text),
                cursor.retstart,
                job.page_size
            );
            let response = self.get_with_retry(&url, job.max_retries, &limiter)?;
            let parsed: SearchPage = serde_json::from_slice(&response.body)
                .map_err(|e| HarvestError::BadResponse(e.to_string()))?;
            total = parsed.total;
            let page_len = parsed.ids.len();
            if page_len > 0 {
                pages.push(parsed.ids);
                cursor.retstart += page_len;
                write_cursor(&job.cursor_path, &cursor)?;
            }
            if cursor.retstart >= total || page_len == 0 {
                break;
            }
        }
        Ok(SearchOutcome {
            total,
            pages,
            retries: self.retries_recorded() - start_retries,
            resumed_from,
        })
    }

    /// Raw payload bytes for one id page, batched at most `page_size` ids
    /// per request. Unknown ids are reported and the batch continues.
    pub fn fetch_records(&self, job: &HarvestJob, id_page: &[String]) -> Result<FetchOutcome> {
        let limiter = self.limiter_for(job);
        let mut outcome = FetchOutcome::default();
        let start_retries = self.retries_recorded();
        for batch in id_page.chunks(job.page_size.max(1)) {
            let ids = batch
                .iter()
                .map(|id| percent_encode(id))
                .collect::<Vec<_>>()
                .join(",");
            let url = format!(
                "{}/fetch?db={}&id={}",
                self.endpoint, job.source_db, ids
            );
            let response = self.get_with_retry(&url, job.max_retries, &limiter)?;
            outcome.missing.extend(response.missing_ids);
            outcome.payloads.push(response.body);
        }
        outcome.retries = self.retries_recorded() - start_retries;
        Ok(outcome)
    }

    fn get_with_retry(
        &self,
        url: &str,
        max_retries: u32,
        limiter: &RateLimiter,
    ) -> Result<TransportResponse> {
        let mut attempt = 0u32;
        loop {
            limiter.acquire(self.clock.as_ref());
            let failure = match self.transport.get(url) {
                Ok(response) if response.status == 200 => return Ok(response),
                Ok(response) if response.status == 429 || response.status >= 500 => {
                    format!("status {}", response.status)
                }
                Ok(response) => {
                    return Err(HarvestError::NonTransient {
                        status: response.status,
                        detail: String::from_utf8_lossy(&response.body)
                            .chars()
                            .take(200)
                            .collect(),
                    })
                }
                Err(TransportError::Timeout) => "timeout".to_string(),
                Err(TransportError::Connect(e)) => format!("connect: {e}"),
                Err(TransportError::Other(e)) => {
                    return Err(HarvestError::BadResponse(e));
                }
            };
            if attempt >= max_retries {
                return Err(HarvestError::RetriesExhausted {
                    attempts: attempt + 1,
                    last: failure,
                });
            }
            // Exponential backoff with full jitter.
            let ceiling = self.backoff_base.as_secs_f64() * 2f64.powi(attempt as i32);
            let delay = self.jitter.lock().unwrap().random_range(0.0..=ceiling);
            self.clock.sleep(Duration::from_secs_f64(delay));
            attempt += 1;
            *self.retries_recorded.lock().unwrap() += 1;
        }
    }
}

#[derive(Deserialize)]
struct SearchPage {
    total: usize,
    ids: Vec<String>,
}
