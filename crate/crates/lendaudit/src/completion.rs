//! Text-completion backends: recorded responses on disk and a live
//! chat-completions endpoint.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use lendaudit_core::mapper::{CompletionError, PromptPair, TextCompletion};
use lendaudit_core::policy::Jurisdiction;
use serde::Deserialize;

pub const REQUEST_FILE: &str = "request.txt";
pub const RESPONSE_FILE: &str = "response.txt";

/// Reads `{root}/{jurisdiction}/{model_id}/response.txt`.
#[derive(Debug, Clone)]
pub struct ReplayClient {
    root: PathBuf,
    jurisdiction: Jurisdiction,
    model_id: String,
}

impl ReplayClient {
    pub fn new(root: &Path, jurisdiction: Jurisdiction, model_id: &str) -> Self {
        ReplayClient { root: root.to_path_buf(), jurisdiction, model_id: model_id.into() }
    }

    pub fn dir(&self) -> PathBuf {
        self.root.join(self.jurisdiction.name()).join(&self.model_id)
    }

    /// Model ids with a recording for `jurisdiction`, sorted.
    pub fn recorded_models(root: &Path, jurisdiction: Jurisdiction) -> Vec<String> {
        let Ok(entries) = fs::read_dir(root.join(jurisdiction.name())) else {
            return Vec::new();
        };
        let mut ids: Vec<String> = entries
            .filter_map(Result::ok)
            .filter(|e| e.path().join(RESPONSE_FILE).is_file())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        ids.sort();
        ids
    }
}

impl TextCompletion for ReplayClient {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn complete(&self, prompt: &PromptPair) -> Result<String, CompletionError> {
        let dir = self.dir();
        let response = dir.join(RESPONSE_FILE);
        let text = fs::read_to_string(&response).map_err(|_| CompletionError::MissingFixture(response.display().to_string()))?;
        if let Ok(recorded) = fs::read_to_string(dir.join(REQUEST_FILE)) {
            if recorded != prompt.request_text() {
                log::warn!("{}: recorded request differs from the rendered prompt", dir.display());
            }
        }
        Ok(text)
    }
}

/// OpenAI-style chat-completions endpoint.
#[derive(Debug, Clone)]
pub struct HttpClient {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

impl TextCompletion for HttpClient {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn complete(&self, prompt: &PromptPair) -> Result<String, CompletionError> {
        let agent: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(self.timeout)).build().into();
        let body = serde_json::json!({
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
        });
        let mut req = agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let fail = |e: ureq::Error| CompletionError::TransportFailure(e.to_string());
        let parsed: ChatResponse = req.send_json(&body).map_err(fail)?.body_mut().read_json().map_err(fail)?;
        let text = parsed.choices.into_iter().next().and_then(|c| c.message.content).unwrap_or_default();
        if text.trim().is_empty() {
            return Err(CompletionError::EmptyResponse);
        }
        Ok(text)
    }
}
