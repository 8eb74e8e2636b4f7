//! Deterministic playback provider.
//!
//! Fixture format (version 1):
//!
//! ```json
//! {
//!   "version": 1,
//!   "id": "mock-hardpack",
//!   "default_failure": { "error": "no fixture entry" },
//!   "entries": [
//!     { "strategy": "simple_cga", "instruction": "...", "attempt": 0, "trial": 2,
//!       "text": "{...}", "prompt_tokens": 310, "completion_tokens": 22, "latency_s": 1.4 }
//!   ]
//! }
//! ```
//!
//! `attempt` and `trial` are optional; when several entries match a query the one
//! pinning the most of them wins, earlier entries breaking ties. An entry with
//! `error` instead of `text` plays back as a transport failure.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CompletionRequest, GatewayError, Provider, ProviderError, ProviderReply, StrategyName};

pub const FIXTURE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockEntry {
    pub strategy: StrategyName,
    pub instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempt: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
    #[serde(default)]
    pub latency_s: f64,
}

impl MockEntry {
    pub fn reply(strategy: StrategyName, instruction: impl Into<String>, text: impl Into<String>) -> Self {
        MockEntry {
            strategy,
            instruction: instruction.into(),
            attempt: None,
            trial: None,
            text: Some(text.into()),
            error: None,
            prompt_tokens: 0,
            completion_tokens: 0,
            latency_s: 0.0,
        }
    }

    pub fn at_attempt(mut self, attempt: u32) -> Self {
        self.attempt = Some(attempt);
        self
    }

    pub fn at_trial(mut self, trial: u32) -> Self {
        self.trial = Some(trial);
        self
    }

    pub fn with_usage(mut self, prompt_tokens: u64, completion_tokens: u64, latency_s: f64) -> Self {
        self.prompt_tokens = prompt_tokens;
        self.completion_tokens = completion_tokens;
        self.latency_s = latency_s;
        self
    }

    fn specificity(&self, req: &CompletionRequest) -> Option<u8> {
        if self.strategy != req.strategy || self.instruction.trim() != req.instruction.trim() {
            return None;
        }
        let mut score = 0;
        for (pin, actual) in [(self.attempt, req.attempt), (self.trial, req.trial)] {
            match pin {
                Some(p) if p != actual => return None,
                Some(_) => score += 1,
                None => {}
            }
        }
        Some(score)
    }
}

/// What unmatched queries play back as.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefaultFailure {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Default for DefaultFailure {
    fn default() -> Self {
        DefaultFailure {
            text: None,
            error: Some("mock provider: no fixture entry for this query".to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockFixture {
    pub version: u32,
    #[serde(default = "default_id")]
    pub id: String,
    #[serde(default)]
    pub default_failure: DefaultFailure,
    pub entries: Vec<MockEntry>,
}

fn default_id() -> String {
    "mock".to_string()
}

impl MockFixture {
    pub fn new(entries: Vec<MockEntry>) -> Self {
        MockFixture {
            version: FIXTURE_VERSION,
            id: default_id(),
            default_failure: DefaultFailure::default(),
            entries,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, GatewayError> {
        let fixture: MockFixture = serde_json::from_str(text).map_err(|e| GatewayError::Fixture(e.to_string()))?;
        fixture.validate()?;
        Ok(fixture)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serializes")
    }

    fn validate(&self) -> Result<(), GatewayError> {
        if self.version != FIXTURE_VERSION {
            return Err(GatewayError::FixtureVersion(self.version));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if e.text.is_some() == e.error.is_some() {
                return Err(GatewayError::Fixture(format!(
                    "entry {i} must have exactly one of `text` or `error`"
                )));
            }
            if !(e.latency_s >= 0.0 && e.latency_s.is_finite()) {
                return Err(GatewayError::Fixture(format!("entry {i} has invalid latency {}", e.latency_s)));
            }
        }
        if self.default_failure.text.is_some() == self.default_failure.error.is_some() {
            return Err(GatewayError::Fixture(
                "default_failure must have exactly one of `text` or `error`".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MockProvider {
    fixture: MockFixture,
}

impl MockProvider {
    pub fn new(fixture: MockFixture) -> Result<Self, GatewayError> {
        fixture.validate()?;
        Ok(Self { fixture })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        Self::new(MockFixture::from_path(path)?)
    }

    pub fn fixture(&self) -> &MockFixture {
        &self.fixture
    }

    pub fn lookup(&self, req: &CompletionRequest) -> Option<&MockEntry> {
        let mut best: Option<(u8, &MockEntry)> = None;
        for entry in &self.fixture.entries {
            if let Some(score) = entry.specificity(req) {
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, entry));
                }
            }
        }
        best.map(|(_, e)| e)
    }
}

impl Provider for MockProvider {
    fn id(&self) -> &str {
        &self.fixture.id
    }

    fn complete(&self, req: &CompletionRequest) -> Result<ProviderReply, ProviderError> {
        match self.lookup(req) {
            Some(entry) => match (&entry.text, &entry.error) {
                (Some(text), _) => Ok(ProviderReply {
                    text: text.clone(),
                    prompt_tokens: entry.prompt_tokens,
                    completion_tokens: entry.completion_tokens,
                    latency_s: Some(entry.latency_s),
                }),
                (None, Some(err)) => Err(ProviderError {
                    message: err.clone(),
                    latency_s: Some(entry.latency_s),
                }),
                (None, None) => unreachable!("validated"),
            },
            None => match &self.fixture.default_failure {
                DefaultFailure { text: Some(text), .. } => Ok(ProviderReply {
                    text: text.clone(),
                    prompt_tokens: 0,
                    completion_tokens: 0,
                    latency_s: Some(0.0),
                }),
                DefaultFailure { error, .. } => Err(ProviderError {
                    message: error.clone().unwrap_or_default(),
                    latency_s: Some(0.0),
                }),
            },
        }
    }
}
