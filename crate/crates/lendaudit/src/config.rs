//! Optional TOML configuration. Command-line flags override every field.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::completion::HttpClient;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("[llm] needs `endpoint` and `model` for live completions")]
    IncompleteLlm,
    #[error("environment variable {0} holding the API key is not set")]
    MissingCredential(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Directory of policy files; built-in policies when absent.
    pub policies: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub permission_registry: Option<PathBuf>,
    /// Worker threads for corpus runs; 0 or absent means one per core.
    pub jobs: Option<usize>,
    #[serde(default)]
    pub llm: LlmConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmConfig {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub api_key: Option<String>,
    pub timeout_secs: Option<u64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }
}

impl LlmConfig {
    pub fn client(&self, model_override: Option<&str>) -> Result<HttpClient, ConfigError> {
        let endpoint = self.endpoint.clone().ok_or(ConfigError::IncompleteLlm)?;
        let model = model_override.map(String::from).or_else(|| self.model.clone()).ok_or(ConfigError::IncompleteLlm)?;
        let api_key = match (&self.api_key, &self.api_key_env) {
            (Some(k), _) => Some(k.clone()),
            (None, Some(var)) => Some(std::env::var(var).map_err(|_| ConfigError::MissingCredential(var.clone()))?),
            (None, None) => None,
        };
        Ok(HttpClient { endpoint, model, api_key, timeout: Duration::from_secs(self.timeout_secs.unwrap_or(120)) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds_client() {
        let c: Config = toml::from_str(
            "policies = \"p\"\njobs = 4\n[llm]\nendpoint = \"http://h/v1\"\nmodel = \"m\"\napi_key = \"k\"\n",
        )
        .unwrap();
        assert_eq!(c.jobs, Some(4));
        let client = c.llm.client(None).unwrap();
        assert_eq!(client.model, "m");
        assert_eq!(client.api_key.as_deref(), Some("k"));
        assert!(matches!(LlmConfig::default().client(None), Err(ConfigError::IncompleteLlm)));
        assert!(toml::from_str::<Config>("nope = 1").is_err());
    }
}
