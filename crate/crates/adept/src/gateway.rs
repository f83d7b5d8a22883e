//! Text-generation backends: an OpenAI-compatible HTTP client, a keyed
//! fixture directory and scenario manifests.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use adept_core::llm::{Backend, GenerateError, GenerationRequest, GenerationResponse, ScenarioBackend, ScenarioEntry};
use serde::Deserialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_BASE_URL: &str = "ADEPT_LLM_BASE_URL";
pub const ENV_MODEL: &str = "ADEPT_LLM_MODEL";
pub const ENV_API_KEY: &str = "ADEPT_LLM_API_KEY";

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("environment variable {0} is not set")]
    MissingEnv(&'static str),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad scenario manifest {path}: {source}")]
    Manifest { path: PathBuf, source: serde_json::Error },
}

/// Chat-completions client. Transport failures, 429 and 5xx answers are
/// retried with exponential backoff.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    pub base_url: String,
    pub model: String,
    api_key: String,
    pub retries: u32,
    pub backoff: Duration,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<ChatUsage>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct ChatUsage {
    prompt_tokens: Option<u64>,
    completion_tokens: Option<u64>,
}

enum Attempt {
    Done(GenerationResponse),
    Retry(GenerateError),
    Fail(GenerateError),
}

impl RemoteBackend {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, api_key: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(600)))
            .build();
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model: model.into(),
            api_key: api_key.into(),
            retries: 3,
            backoff: Duration::from_millis(500),
            agent: config.into(),
        }
    }

    pub fn from_env() -> Result<Self, GatewayError> {
        let var = |name| std::env::var(name).map_err(|_| GatewayError::MissingEnv(name));
        Ok(Self::new(var(ENV_BASE_URL)?, var(ENV_MODEL)?, std::env::var(ENV_API_KEY).unwrap_or_default()))
    }

    fn attempt(&self, request: &GenerationRequest) -> Attempt {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let started = Instant::now();
        let mut call = self.agent.post(format!("{}/chat/completions", self.base_url));
        if !self.api_key.is_empty() {
            call = call.header("Authorization", format!("Bearer {}", self.api_key));
        }
        let mut response = match call.send_json(&body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(GenerateError::Transport(e.to_string())),
        };
        let status = response.status().as_u16();
        if status != 200 {
            let message = response.body_mut().read_to_string().unwrap_or_default();
            let err = GenerateError::Provider { status, message: message.chars().take(500).collect() };
            return if status == 429 || status >= 500 { Attempt::Retry(err) } else { Attempt::Fail(err) };
        }
        let parsed: ChatResponse = match response.body_mut().read_json() {
            Ok(p) => p,
            Err(e) => return Attempt::Fail(GenerateError::Provider { status, message: format!("unreadable completion: {e}") }),
        };
        let text = parsed.choices.into_iter().next().and_then(|c| c.message.content).unwrap_or_default();
        Attempt::Done(GenerationResponse {
            text,
            latency_ms: started.elapsed().as_millis() as u64,
            prompt_tokens: parsed.usage.as_ref().and_then(|u| u.prompt_tokens),
            completion_tokens: parsed.usage.as_ref().and_then(|u| u.completion_tokens),
            provider: self.model.clone(),
        })
    }
}

impl Backend for RemoteBackend {
    fn complete(&mut self, request: &GenerationRequest) -> Result<GenerationResponse, GenerateError> {
        let mut last = GenerateError::Transport("no attempt made".into());
        for i in 0..=self.retries {
            if i > 0 {
                std::thread::sleep(self.backoff * 2u32.pow(i - 1));
            }
            match self.attempt(request) {
                Attempt::Done(r) => return Ok(r),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) => {
                    log::warn!("{} attempt {} failed: {e}", request.template.tag(), i + 1);
                    last = e;
                }
            }
        }
        Err(last)
    }
}

/// Hex SHA-256 of a prompt.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Responses stored as `<template tag>-<first 16 hex digits of the prompt
/// hash>.txt` in one directory.
#[derive(Debug, Clone)]
pub struct FixtureBackend {
    pub dir: PathBuf,
}

impl FixtureBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn file_name(request: &GenerationRequest) -> String {
        format!("{}-{}.txt", request.template.tag(), &prompt_hash(&request.prompt)[..16])
    }

    /// Stores `text` as the answer to `request`.
    pub fn record(&self, request: &GenerationRequest, text: &str) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(Self::file_name(request));
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

impl Backend for FixtureBackend {
    fn complete(&mut self, request: &GenerationRequest) -> Result<GenerationResponse, GenerateError> {
        let name = Self::file_name(request);
        match std::fs::read_to_string(self.dir.join(&name)) {
            Ok(text) => Ok(GenerationResponse::offline(text, "fixture")),
            Err(_) => Err(GenerateError::FixtureMissing { template: request.template.tag().to_string(), key: name }),
        }
    }
}

/// Reads a scenario manifest: a JSON list of rules.
pub fn load_scenario(path: &Path) -> Result<ScenarioBackend, GatewayError> {
    let text = std::fs::read_to_string(path).map_err(|source| GatewayError::Io { path: path.to_path_buf(), source })?;
    let entries: Vec<ScenarioEntry> =
        serde_json::from_str(&text).map_err(|source| GatewayError::Manifest { path: path.to_path_buf(), source })?;
    Ok(ScenarioBackend::new(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use adept_core::prompts::TemplateId;

    fn req(prompt: &str) -> GenerationRequest {
        GenerationRequest { prompt: prompt.into(), temperature: 0.8, max_tokens: 10, template: TemplateId::II1MicroTune }
    }

    #[test]
    fn fixtures_are_keyed_by_template_and_prompt() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = FixtureBackend::new(dir.path());
        b.record(&req("a"), "answer a").unwrap();
        assert_eq!(b.complete(&req("a")).unwrap().text, "answer a");
        assert_eq!(b.complete(&req("a")).unwrap().text, "answer a");
        assert!(matches!(b.complete(&req("b")), Err(GenerateError::FixtureMissing { .. })));
        let name = FixtureBackend::file_name(&req("a"));
        assert!(name.starts_with("II1_MicroTune-") && name.len() == "II1_MicroTune-".len() + 16 + 4);
    }

    #[test]
    fn unreachable_endpoint_is_a_transport_error() {
        let mut b = RemoteBackend::new("http://127.0.0.1:9", "m", "");
        b.retries = 1;
        b.backoff = Duration::from_millis(1);
        assert!(matches!(b.complete(&req("x")), Err(GenerateError::Transport(_))));
    }
}
