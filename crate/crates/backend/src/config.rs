use std::time::Duration;

use rcm_core::token::{CALL_CLOSE_TEXT, RET_CLOSE_TEXT};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            initial_backoff: Duration::from_millis(500),
            max_backoff: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): doubling from the
    /// initial backoff, capped.
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry.saturating_sub(1)).unwrap_or(u32::MAX);
        self.initial_backoff.saturating_mul(factor).min(self.max_backoff)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackendConfig {
    /// Base URL up to and excluding `/chat/completions`.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the API key. No key is sent when unset.
    pub api_key_env: Option<String>,
    pub timeout: Duration,
    pub max_tokens: u32,
    pub temperature: f32,
    stop: Vec<String>,
    pub retry: RetryPolicy,
    /// Shared request rate; `None` disables limiting.
    pub requests_per_second: Option<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("base URL must start with http:// or https://, got {0:?}")]
    BaseUrl(String),
    #[error("model name is empty")]
    Model,
    #[error("max_tokens must be positive")]
    MaxTokens,
    #[error("requests per second must be positive and finite")]
    Rate,
}

impl BackendConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        BackendConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: Some("OPENAI_API_KEY".into()),
            timeout: Duration::from_secs(120),
            max_tokens: 2048,
            temperature: 0.0,
            stop: vec![CALL_CLOSE_TEXT.into(), RET_CLOSE_TEXT.into()],
            retry: RetryPolicy::default(),
            requests_per_second: None,
        }
    }

    /// Stop sequences sent with every request. Always includes both closing
    /// markers.
    pub fn stop(&self) -> &[String] {
        &self.stop
    }

    pub fn with_extra_stop(mut self, s: impl Into<String>) -> Self {
        let s = s.into();
        if !self.stop.contains(&s) {
            self.stop.push(s);
        }
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(ConfigError::BaseUrl(self.base_url.clone()));
        }
        if self.model.trim().is_empty() {
            return Err(ConfigError::Model);
        }
        if self.max_tokens == 0 {
            return Err(ConfigError::MaxTokens);
        }
        if let Some(r) = self.requests_per_second {
            if !(r.is_finite() && r > 0.0) {
                return Err(ConfigError::Rate);
            }
        }
        Ok(())
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}
