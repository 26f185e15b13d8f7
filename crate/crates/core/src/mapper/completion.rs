use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompt::PromptPair;
use crate::digest::sha256_hex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompletionError {
    #[error("transport failure: {0}")]
    TransportFailure(String),
    #[error("model returned an empty response")]
    EmptyResponse,
    #[error("no recorded response at {0}")]
    MissingFixture(String),
}

/// A text-completion backend: a live endpoint or recorded responses.
pub trait TextCompletion {
    fn model_id(&self) -> &str;
    fn complete(&self, prompt: &PromptPair) -> Result<String, CompletionError>;
}

/// A response together with what produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub model_id: String,
    /// SHA-256 of [`PromptPair::request_text`].
    pub request_digest: String,
    pub response: String,
}

pub fn complete(prompt: &PromptPair, client: &dyn TextCompletion) -> Result<CompletionRecord, CompletionError> {
    let response = client.complete(prompt)?;
    if response.trim().is_empty() {
        return Err(CompletionError::EmptyResponse);
    }
    Ok(CompletionRecord {
        model_id: client.model_id().into(),
        request_digest: sha256_hex(prompt.request_text().as_bytes()),
        response,
    })
}
