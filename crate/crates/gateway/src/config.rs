//! TOML configuration selecting a provider and per-strategy budgets.
//!
//! ```toml
//! provider = "openai"            # or "mock"
//! model = "gpt-4o-mini"
//! base_url = "https://api.openai.com/v1"
//! api_key_env = "OPENAI_API_KEY"
//! timeout_s = 60
//! # mock_fixture = "fixtures/hardpack_mock.json"
//!
//! [max_tokens]
//! simple_cga = 600
//! compact_se3 = 500
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::{GatewayError, MockProvider, OpenAiProvider, PromptStrategy, Provider, StrategyName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Openai,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatewayConfig {
    #[serde(default = "default_provider")]
    pub provider: ProviderKind,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_base_url")]
    pub base_url: String,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_fixture: Option<PathBuf>,
    #[serde(default)]
    pub max_tokens: BTreeMap<StrategyName, u32>,
}

fn default_provider() -> ProviderKind {
    ProviderKind::Openai
}

fn default_model() -> String {
    "gpt-4o-mini".to_string()
}

fn default_base_url() -> String {
    "https://api.openai.com/v1".to_string()
}

fn default_key_env() -> String {
    "OPENAI_API_KEY".to_string()
}

fn default_timeout() -> u64 {
    60
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            provider: default_provider(),
            model: default_model(),
            base_url: default_base_url(),
            api_key_env: default_key_env(),
            timeout_s: default_timeout(),
            mock_fixture: None,
            max_tokens: BTreeMap::new(),
        }
    }
}

impl GatewayConfig {
    pub fn mock(fixture: impl Into<PathBuf>) -> Self {
        GatewayConfig {
            provider: ProviderKind::Mock,
            mock_fixture: Some(fixture.into()),
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, GatewayError> {
        toml::from_str(text).map_err(|e| GatewayError::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn max_tokens_for(&self, name: StrategyName) -> u32 {
        self.max_tokens.get(&name).copied().unwrap_or_else(|| name.default_max_tokens())
    }

    pub fn strategy(&self, name: StrategyName) -> PromptStrategy {
        PromptStrategy::builtin(name).with_max_tokens(self.max_tokens_for(name))
    }

    /// Whether a live provider could be built right now (key present).
    pub fn llm_available(&self) -> bool {
        match self.provider {
            ProviderKind::Mock => self.mock_fixture.is_some(),
            ProviderKind::Openai => std::env::var(&self.api_key_env).is_ok_and(|k| !k.trim().is_empty()),
        }
    }

    pub fn build_provider(&self) -> Result<Arc<dyn Provider>, GatewayError> {
        match self.provider {
            ProviderKind::Mock => {
                let path = self
                    .mock_fixture
                    .as_ref()
                    .ok_or_else(|| GatewayError::Config("mock provider needs `mock_fixture`".to_string()))?;
                Ok(Arc::new(MockProvider::from_path(path)?))
            }
            ProviderKind::Openai => {
                let key = std::env::var(&self.api_key_env)
                    .ok()
                    .filter(|k| !k.trim().is_empty())
                    .ok_or_else(|| GatewayError::MissingApiKey(self.api_key_env.clone()))?;
                Ok(Arc::new(OpenAiProvider::new(
                    self.base_url.clone(),
                    self.model.clone(),
                    key,
                    Duration::from_secs(self.timeout_s),
                )))
            }
        }
    }
}
