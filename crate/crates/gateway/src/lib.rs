//! Completion gateway: prompt registry, the pass@k retry loop and provider adapters.
//!
//! The gateway only reads scenes (to render the object context) and never executes
//! anything; callers decide what counts as an acceptable reply through the validator.

pub mod config;
pub mod mock;
pub mod openai;
pub mod prompts;

use std::time::Instant;

use motorscene_core::scene::Scene;
use motorscene_core::templates::format_number;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::GatewayConfig;
pub use mock::{MockEntry, MockFixture, MockProvider};
pub use openai::OpenAiProvider;
pub use prompts::{registry, PromptStrategy, StrategyName};

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("unknown strategy '{0}'")]
    UnknownStrategy(String),
    #[error("retry policy needs at least one attempt")]
    ZeroAttempts,
    #[error("malformed mock fixture: {0}")]
    Fixture(String),
    #[error("unsupported fixture version {0}")]
    FixtureVersion(u32),
    #[error("config: {0}")]
    Config(String),
    #[error("environment variable {0} is not set")]
    MissingApiKey(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How many attempts a task gets and the decoding temperature of each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
}

impl RetryPolicy {
    pub const TEMPERATURE_SCHEDULE: &'static str = "0.1 + 0.05 * attempt";

    pub fn new(max_attempts: u32) -> Result<Self, GatewayError> {
        if max_attempts == 0 {
            return Err(GatewayError::ZeroAttempts);
        }
        Ok(Self { max_attempts })
    }

    pub fn pass_at(k: u32) -> Result<Self, GatewayError> {
        Self::new(k)
    }

    /// Temperature for 0-based attempt `a`.
    pub fn temperature(&self, attempt: u32) -> f64 {
        0.1 + 0.05 * attempt as f64
    }

    pub fn temperatures(&self) -> Vec<f64> {
        (0..self.max_attempts).map(|a| self.temperature(a)).collect()
    }
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 1 }
    }
}

/// Everything a provider needs for one attempt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest {
    pub strategy: StrategyName,
    pub system_prompt: String,
    pub user_message: String,
    pub instruction: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub attempt: u32,
    /// Repeat index of the surrounding benchmark trial; mock playback keys on it.
    pub trial: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderReply {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Provider-reported latency; `None` means the gateway's own wall clock is used.
    pub latency_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}")]
pub struct ProviderError {
    pub message: String,
    pub latency_s: Option<f64>,
}

impl ProviderError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            latency_s: None,
        }
    }
}

pub trait Provider: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, request: &CompletionRequest) -> Result<ProviderReply, ProviderError>;
}

impl<P: Provider + ?Sized> Provider for Box<P> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<ProviderReply, ProviderError> {
        (**self).complete(request)
    }
}

impl<P: Provider + ?Sized> Provider for std::sync::Arc<P> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<ProviderReply, ProviderError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub attempt_index: u32,
    pub raw_text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub api_latency_s: f64,
    pub provider_id: String,
    pub temperature: f64,
    /// Transport failure, if the provider never produced text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub accepted: bool,
}

impl CompletionRecord {
    pub fn total_tokens(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub records: Vec<CompletionRecord>,
    pub success_index: Option<u32>,
}

impl Completion {
    pub fn accepted(&self) -> Option<&CompletionRecord> {
        self.success_index.map(|i| &self.records[i as usize])
    }

    /// The reply that downstream evaluation should see: the accepted one, else the last.
    pub fn final_record(&self) -> Option<&CompletionRecord> {
        self.accepted().or(self.records.last())
    }

    pub fn api_latency_s(&self) -> f64 {
        self.records.iter().map(|r| r.api_latency_s).sum()
    }

    pub fn total_tokens(&self) -> u64 {
        self.records.iter().map(CompletionRecord::total_tokens).sum()
    }
}

pub fn user_message(scene_context: &str, instruction: &str) -> String {
    format!("Scene objects:\n{scene_context}\n\nInstruction: {instruction}")
}

/// Issues attempts until `validator` accepts a reply or the policy is exhausted.
pub fn complete<P, V>(
    provider: &P,
    strategy: &PromptStrategy,
    scene_context: &str,
    instruction: &str,
    policy: &RetryPolicy,
    validator: V,
) -> Completion
where
    P: Provider + ?Sized,
    V: FnMut(&str) -> bool,
{
    complete_trial(provider, strategy, scene_context, instruction, policy, 0, validator)
}

pub fn complete_trial<P, V>(
    provider: &P,
    strategy: &PromptStrategy,
    scene_context: &str,
    instruction: &str,
    policy: &RetryPolicy,
    trial: u32,
    mut validator: V,
) -> Completion
where
    P: Provider + ?Sized,
    V: FnMut(&str) -> bool,
{
    let user = user_message(scene_context, instruction);
    let mut records = Vec::new();
    let mut success_index = None;
    for attempt in 0..policy.max_attempts.max(1) {
        let request = CompletionRequest {
            strategy: strategy.name,
            system_prompt: strategy.system_prompt.clone(),
            user_message: user.clone(),
            instruction: instruction.to_string(),
            max_tokens: strategy.max_tokens,
            temperature: policy.temperature(attempt),
            attempt,
            trial,
        };
        let started = Instant::now();
        let outcome = provider.complete(&request);
        let wall = started.elapsed().as_secs_f64();
        let record = match outcome {
            Ok(reply) => {
                let accepted = validator(&reply.text);
                CompletionRecord {
                    attempt_index: attempt,
                    raw_text: reply.text,
                    prompt_tokens: reply.prompt_tokens,
                    completion_tokens: reply.completion_tokens,
                    api_latency_s: reply.latency_s.unwrap_or(wall).max(0.0),
                    provider_id: provider.id().to_string(),
                    temperature: request.temperature,
                    error: None,
                    accepted,
                }
            }
            Err(e) => CompletionRecord {
                attempt_index: attempt,
                raw_text: String::new(),
                prompt_tokens: 0,
                completion_tokens: 0,
                api_latency_s: e.latency_s.unwrap_or(wall).max(0.0),
                provider_id: provider.id().to_string(),
                temperature: request.temperature,
                error: Some(e.message),
                accepted: false,
            },
        };
        let accepted = record.accepted;
        records.push(record);
        if accepted {
            success_index = Some(attempt);
            break;
        }
    }
    Completion { records, success_index }
}

/// One line per object: `name shape color [x, y, z] size`, optionally capped.
pub fn scene_context_render(scene: &Scene, limit: Option<usize>) -> String {
    let take = limit.unwrap_or(usize::MAX);
    scene
        .objects()
        .take(take)
        .map(|o| {
            format!(
                "{} {} {} [{}, {}, {}] {}",
                o.name,
                o.shape,
                o.color,
                format_number(o.center[0]),
                format_number(o.center[1]),
                format_number(o.center[2]),
                format_number(o.size)
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}
