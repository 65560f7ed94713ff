//! Blocking JSON-over-HTTP client shared by the remote scorer, correction and
//! transcription backends.

use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemoteError {
    #[error("request to {url} timed out")]
    Timeout { url: String },
    #[error("could not reach {url}: {message}")]
    ConnectionFailure { url: String, message: String },
    #[error("{url} answered with HTTP {status}")]
    HttpStatus { url: String, status: u16 },
    #[error("malformed response from {url}: {message}")]
    MalformedResponse { url: String, message: String },
}

impl RemoteError {
    /// Whether repeating the same request may succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            RemoteError::Timeout { .. } | RemoteError::ConnectionFailure { .. } => true,
            RemoteError::HttpStatus { status, .. } => *status == 429 || *status >= 500,
            RemoteError::MalformedResponse { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Extra attempts after the first one.
    pub max_retries: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub base_delay_ms: u64,
    /// Per-request timeout.
    pub timeout_s: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay_ms: 200,
            timeout_s: 30.0,
        }
    }
}

impl RetryPolicy {
    pub fn delay_before_retry(&self, retry: u32) -> Duration {
        Duration::from_millis(self.base_delay_ms.saturating_mul(1u64 << retry.min(20)))
    }

    /// Runs `op` until it succeeds, fails with a non-retryable error, or the
    /// retry budget is spent.
    pub fn run<T>(&self, mut op: impl FnMut() -> Result<T, RemoteError>) -> Result<T, RemoteError> {
        let mut retry = 0;
        loop {
            match op() {
                Err(e) if e.is_retryable() && retry < self.max_retries => {
                    thread::sleep(self.delay_before_retry(retry));
                    retry += 1;
                }
                other => return other,
            }
        }
    }
}

/// A JSON endpoint rooted at `base_url`. Cheap to clone and safe to share
/// across threads; the underlying agent pools connections.
#[derive(Debug, Clone)]
pub struct JsonClient {
    base_url: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

impl JsonClient {
    pub fn new(base_url: impl Into<String>, retry: RetryPolicy) -> Self {
        let timeout = Duration::from_secs_f64(retry.timeout_s.max(0.001));
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        JsonClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            agent,
            retry,
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}/{}", self.base_url, path.trim_start_matches('/'))
    }

    /// POSTs `body` to `path` with retries, decoding a JSON response.
    pub fn post<Req: Serialize, Resp: DeserializeOwned>(&self, path: &str, body: &Req) -> Result<Resp, RemoteError> {
        let url = self.url(path);
        self.retry.run(|| self.post_once(&url, body))
    }

    fn post_once<Req: Serialize, Resp: DeserializeOwned>(&self, url: &str, body: &Req) -> Result<Resp, RemoteError> {
        let mut response = self.agent.post(url).send_json(body).map_err(|e| classify(url, e))?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(RemoteError::HttpStatus {
                url: url.to_string(),
                status,
            });
        }
        let text = response.body_mut().read_to_string().map_err(|e| classify(url, e))?;
        serde_json::from_str(&text).map_err(|e| RemoteError::MalformedResponse {
            url: url.to_string(),
            message: e.to_string(),
        })
    }
}

fn classify(url: &str, err: ureq::Error) -> RemoteError {
    let url = url.to_string();
    match err {
        ureq::Error::Timeout(_) => RemoteError::Timeout { url },
        ureq::Error::Io(e) if e.kind() == std::io::ErrorKind::TimedOut => RemoteError::Timeout { url },
        ureq::Error::Io(_)
        | ureq::Error::HostNotFound
        | ureq::Error::ConnectionFailed
        | ureq::Error::BadUri(_)
        | ureq::Error::Protocol(_) => RemoteError::ConnectionFailure {
            url,
            message: err.to_string(),
        },
        ureq::Error::StatusCode(status) => RemoteError::HttpStatus { url, status },
        other => RemoteError::MalformedResponse {
            url,
            message: other.to_string(),
        },
    }
}
