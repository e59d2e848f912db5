//! Chat-completion backed analyzer.

use std::fmt;
use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

use super::analyzer::{Analyzer, AnalyzerError, AnalyzerRequest, RequestKind};
use super::schema;

pub const ENV_BASE_URL: &str = "DB_LLM_BASE_URL";
pub const ENV_API_KEY: &str = "DB_LLM_API_KEY";
pub const ENV_MODEL: &str = "DB_LLM_MODEL";
pub const ENV_TIMEOUT_S: &str = "DB_LLM_TIMEOUT_S";
pub const ENV_MAX_RETRIES: &str = "DB_LLM_MAX_RETRIES";

const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
const DEFAULT_MODEL: &str = "gpt-4o";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("environment variable {0} is not set")]
    Missing(&'static str),
    #[error("environment variable {var} has invalid value `{value}`")]
    Invalid { var: &'static str, value: String },
}

#[derive(Clone, PartialEq, Eq)]
pub struct LlmAnalyzerConfig {
    pub base_url: String,
    pub api_key: String,
    pub model: String,
    pub timeout: Duration,
    pub max_retries: u32,
}

impl fmt::Debug for LlmAnalyzerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmAnalyzerConfig")
            .field("base_url", &self.base_url)
            .field("api_key", &"<redacted>")
            .field("model", &self.model)
            .field("timeout", &self.timeout)
            .field("max_retries", &self.max_retries)
            .finish()
    }
}

impl LlmAnalyzerConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    /// Reads configuration through `lookup`, so tests need not touch the
    /// process environment.
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let api_key = lookup(ENV_API_KEY)
            .filter(|k| !k.trim().is_empty())
            .ok_or(ConfigError::Missing(ENV_API_KEY))?;
        let base_url = lookup(ENV_BASE_URL).unwrap_or_else(|| DEFAULT_BASE_URL.to_string());
        if base_url.trim().is_empty() {
            return Err(ConfigError::Invalid {
                var: ENV_BASE_URL,
                value: base_url,
            });
        }
        let model = lookup(ENV_MODEL).unwrap_or_else(|| DEFAULT_MODEL.to_string());
        let timeout_s = match lookup(ENV_TIMEOUT_S) {
            None => 60.0,
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|s| s.is_finite() && *s > 0.0)
                .ok_or(ConfigError::Invalid {
                    var: ENV_TIMEOUT_S,
                    value: v,
                })?,
        };
        let max_retries = match lookup(ENV_MAX_RETRIES) {
            None => 2,
            Some(v) => v.parse::<u32>().map_err(|_| ConfigError::Invalid {
                var: ENV_MAX_RETRIES,
                value: v,
            })?,
        };
        Ok(LlmAnalyzerConfig {
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key,
            model,
            timeout: Duration::from_secs_f64(timeout_s),
            max_retries,
        })
    }
}

/// Sends each request with its step prompt as the system message. A response
/// that fails to parse is retried up to `max_retries` times with the parse
/// error appended; the last response is returned either way.
pub struct LlmAnalyzer {
    config: LlmAnalyzerConfig,
    client: reqwest::blocking::Client,
}

impl LlmAnalyzer {
    pub fn new(config: LlmAnalyzerConfig) -> Result<Self, AnalyzerError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| AnalyzerError::Unavailable(e.to_string()))?;
        Ok(LlmAnalyzer { config, client })
    }

    pub fn config(&self) -> &LlmAnalyzerConfig {
        &self.config
    }

    fn chat(&self, messages: &[Value]) -> Result<String, AnalyzerError> {
        let url = format!("{}/chat/completions", self.config.base_url);
        let body = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": messages,
        });
        let response = self
            .client
            .post(&url)
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| AnalyzerError::Unavailable(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(AnalyzerError::Unavailable(format!("{url} answered {status}")));
        }
        let value: Value = response
            .json()
            .map_err(|e| AnalyzerError::Unavailable(format!("unreadable completion: {e}")))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| AnalyzerError::Unavailable("completion has no message content".into()))
    }
}

fn check_shape(kind: RequestKind, text: &str) -> Result<(), String> {
    let result = match kind {
        RequestKind::Segment => schema::parse_segmentation(text).map(|_| ()),
        RequestKind::Extract => schema::parse_scene_info(text).map(|_| ()),
        RequestKind::Classify => schema::parse_classification(text).map(|_| ()),
    };
    result.map_err(|e| e.to_string())
}

impl Analyzer for LlmAnalyzer {
    fn complete(&self, request: &AnalyzerRequest) -> Result<String, AnalyzerError> {
        let mut messages = vec![
            json!({"role": "system", "content": request.prompt()}),
            json!({"role": "user", "content": request.input}),
        ];
        let mut attempt = 0;
        loop {
            let content = self.chat(&messages)?;
            match check_shape(request.kind, &content) {
                Ok(()) => return Ok(content),
                Err(reason) if attempt < self.config.max_retries => {
                    log::warn!("{} response rejected (attempt {}): {reason}", request.kind, attempt + 1);
                    messages.push(json!({"role": "assistant", "content": content}));
                    messages.push(json!({
                        "role": "user",
                        "content": format!(
                            "The previous response could not be parsed: {reason}. \
                             Reply again with only the JSON described in the output requirements."
                        ),
                    }));
                    attempt += 1;
                }
                Err(_) => return Ok(content),
            }
        }
    }
}
