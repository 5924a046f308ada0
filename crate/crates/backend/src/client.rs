use std::sync::Arc;
use std::time::Duration;

use log::{debug, warn};
use reqwest::blocking::Client as Http;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{BackendConfig, ConfigError};
use crate::limiter::RateLimiter;
use crate::stop::truncate_at_stop;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("API key variable {0} is not set")]
    MissingKey(String),
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("request timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("HTTP {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("could not build HTTP client: {0}")]
    Client(String),
}

/// One completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    /// Reply text, cut after the first stop sequence.
    pub text: String,
    pub finish_reason: Option<String>,
    pub attempts: u32,
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct Request<'a> {
    model: &'a str,
    messages: Vec<Message<'a>>,
    temperature: f32,
    max_tokens: u32,
    stop: &'a [String],
}

#[derive(Deserialize)]
struct Response {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ReplyMessage {
    content: Option<String>,
}

enum Failure {
    Retry { reason: String, timeout: bool, after: Option<Duration> },
    Fatal(BackendError),
}

/// Blocking client. Clones share the HTTP connection pool and rate limiter.
#[derive(Clone)]
pub struct Client {
    cfg: Arc<BackendConfig>,
    http: Http,
    key: Option<String>,
    limiter: Option<Arc<RateLimiter>>,
}

impl Client {
    pub fn new(cfg: BackendConfig) -> Result<Self, BackendError> {
        cfg.validate()?;
        let key = match &cfg.api_key_env {
            Some(var) => match std::env::var(var) {
                Ok(k) if !k.is_empty() => Some(k),
                _ => None,
            },
            None => None,
        };
        let http = Http::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| BackendError::Client(e.to_string()))?;
        let limiter = cfg.requests_per_second.map(|r| Arc::new(RateLimiter::new(r)));
        Ok(Client {
            cfg: Arc::new(cfg),
            http,
            key,
            limiter,
        })
    }

    /// Fails when the configured key variable is unset.
    pub fn require_key(&self) -> Result<(), BackendError> {
        match (&self.cfg.api_key_env, &self.key) {
            (Some(var), None) => Err(BackendError::MissingKey(var.clone())),
            _ => Ok(()),
        }
    }

    pub fn config(&self) -> &BackendConfig {
        &self.cfg
    }

    pub fn complete(&self, prompt: &str) -> Result<Completion, BackendError> {
        self.complete_with_prefix(prompt, "")
    }

    /// Completes `prompt`, continuing from `prefix` as the start of the
    /// assistant reply when non-empty.
    pub fn complete_with_prefix(&self, prompt: &str, prefix: &str) -> Result<Completion, BackendError> {
        let mut messages = vec![Message {
            role: "user",
            content: prompt,
        }];
        if !prefix.is_empty() {
            messages.push(Message {
                role: "assistant",
                content: prefix,
            });
        }
        let body = Request {
            model: &self.cfg.model,
            messages,
            temperature: self.cfg.temperature,
            max_tokens: self.cfg.max_tokens,
            stop: self.cfg.stop(),
        };
        let url = self.cfg.endpoint();
        let policy = &self.cfg.retry;
        let mut attempt = 0;
        loop {
            attempt += 1;
            if let Some(l) = &self.limiter {
                l.acquire();
            }
            let (reason, timeout, after) = match self.attempt(&url, &body) {
                Ok((text, finish_reason)) => {
                    let stopped = finish_reason.as_deref() == Some("stop");
                    return Ok(Completion {
                        text: truncate_at_stop(&text, self.cfg.stop(), stopped),
                        finish_reason,
                        attempts: attempt,
                    });
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retry { reason, timeout, after }) => (reason, timeout, after),
            };
            if attempt > policy.max_retries {
                return Err(if timeout {
                    BackendError::Timeout { attempts: attempt }
                } else {
                    BackendError::RetriesExhausted {
                        attempts: attempt,
                        last: reason,
                    }
                });
            }
            let wait = after.unwrap_or_else(|| policy.backoff(attempt)).min(policy.max_backoff);
            warn!("attempt {attempt} failed ({reason}); retrying in {wait:?}");
            std::thread::sleep(wait);
        }
    }

    fn attempt(&self, url: &str, body: &Request<'_>) -> Result<(String, Option<String>), Failure> {
        let mut req = self.http.post(url).json(body);
        if let Some(k) = &self.key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| Failure::Retry {
            reason: e.to_string(),
            timeout: e.is_timeout(),
            after: None,
        })?;
        let status = resp.status();
        let after = resp
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = resp.text().map_err(|e| Failure::Retry {
            reason: e.to_string(),
            timeout: e.is_timeout(),
            after: None,
        })?;
        debug!("HTTP {status} with {} bytes", text.len());
        if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
            return Err(Failure::Fatal(BackendError::Auth { status: status.as_u16() }));
        }
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            return Err(Failure::Retry {
                reason: format!("HTTP {status}"),
                timeout: false,
                after,
            });
        }
        if !status.is_success() {
            return Err(Failure::Fatal(BackendError::Rejected {
                status: status.as_u16(),
                body: text,
            }));
        }
        let parsed: Response =
            serde_json::from_str(&text).map_err(|e| Failure::Fatal(BackendError::Malformed(e.to_string())))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| Failure::Fatal(BackendError::Malformed("no choices".into())))?;
        let content = choice
            .message
            .content
            .ok_or_else(|| Failure::Fatal(BackendError::Malformed("choice without content".into())))?;
        Ok((content, choice.finish_reason))
    }
}
