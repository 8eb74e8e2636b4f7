//! Protocol snapshot: the fixed settings a benchmark run was produced under.

use std::collections::BTreeMap;

use motorscene_gateway::{GatewayConfig, PromptStrategy, RetryPolicy, StrategyName};
use serde::{Deserialize, Serialize};

pub const PUBLISHED_TIMESTAMP: &str = "2026-04-16 19:12:37";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotConfig {
    pub timestamp: String,
    pub model: String,
    pub seed: u64,
    /// Per-strategy overrides from the gateway config.
    pub max_tokens: BTreeMap<StrategyName, u32>,
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        SnapshotConfig {
            timestamp: PUBLISHED_TIMESTAMP.to_string(),
            model: "gpt-4o-mini".to_string(),
            seed: 0,
            max_tokens: BTreeMap::new(),
        }
    }
}

impl SnapshotConfig {
    pub fn from_gateway(cfg: &GatewayConfig, timestamp: impl Into<String>, seed: u64) -> Self {
        SnapshotConfig {
            timestamp: timestamp.into(),
            model: cfg.model.clone(),
            seed,
            max_tokens: cfg.max_tokens.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptLength {
    pub strategy: StrategyName,
    pub published_chars: Option<usize>,
    pub measured_chars: usize,
    pub verbatim: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryDefaults {
    /// Attempt budget of a single benchmark task.
    pub run_one_retries: u32,
    pub stress_max_shots: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockBudget {
    pub block: String,
    pub shenlong_cga: u32,
    pub simple_cga: u32,
    pub euclidean_mat4: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoweredSettings {
    pub model: String,
    pub n_per_method: u32,
    pub tasks: u32,
    pub repeats: u32,
    pub retries: u32,
    pub max_tokens: BTreeMap<StrategyName, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSnapshot {
    pub snapshot_timestamp: String,
    pub model: String,
    pub prompt_lengths: Vec<PromptLength>,
    /// "721 / 963 / 435 / 588 characters" style line, published values.
    pub prompt_length_line: String,
    /// Same line computed from the shipped prompt files.
    pub measured_prompt_length_line: String,
    pub temperature_schedule: String,
    pub retry_policy: RetryDefaults,
    pub core33_max_tokens: Vec<BlockBudget>,
    pub powered_semantic: PoweredSettings,
    pub powered_latency: PoweredSettings,
    pub seed: u64,
}

/// Per-block core budgets as (block, Shenlong, Simple, Euclidean).
pub const CORE33_BUDGETS: [(&str, u32, u32, u32); 5] = [
    ("5-object", 500, 300, 400),
    ("stress", 500, 500, 500),
    ("10-object", 500, 400, 500),
    ("accuracy", 300, 300, 300),
    ("100-object", 600, 600, 600),
];

pub const RUN_ONE_RETRIES: u32 = 2;
pub const STRESS_MAX_SHOTS: u32 = 3;

fn budgets(cfg: &SnapshotConfig, methods: &[StrategyName]) -> BTreeMap<StrategyName, u32> {
    methods
        .iter()
        .map(|&m| (m, cfg.max_tokens.get(&m).copied().unwrap_or_else(|| m.default_max_tokens())))
        .collect()
}

/// Pure function of `cfg`.
pub fn protocol_snapshot(cfg: &SnapshotConfig) -> ProtocolSnapshot {
    let prompt_lengths: Vec<PromptLength> = StrategyName::MAIN
        .into_iter()
        .map(|name| {
            let p = PromptStrategy::builtin(name);
            PromptLength {
                strategy: name,
                published_chars: name.published_prompt_chars(),
                measured_chars: p.prompt_chars(),
                verbatim: p.verbatim,
            }
        })
        .collect();
    let line = |f: &dyn Fn(&PromptLength) -> usize| {
        let parts: Vec<String> = prompt_lengths.iter().map(|p| f(p).to_string()).collect();
        format!("{} characters", parts.join(" / "))
    };
    ProtocolSnapshot {
        snapshot_timestamp: cfg.timestamp.clone(),
        model: cfg.model.clone(),
        prompt_length_line: line(&|p| p.published_chars.unwrap_or(p.measured_chars)),
        measured_prompt_length_line: line(&|p| p.measured_chars),
        prompt_lengths,
        temperature_schedule: RetryPolicy::TEMPERATURE_SCHEDULE.to_string(),
        retry_policy: RetryDefaults {
            run_one_retries: RUN_ONE_RETRIES,
            stress_max_shots: STRESS_MAX_SHOTS,
        },
        core33_max_tokens: CORE33_BUDGETS
            .iter()
            .map(|&(block, shenlong_cga, simple_cga, euclidean_mat4)| BlockBudget {
                block: block.to_string(),
                shenlong_cga,
                simple_cga,
                euclidean_mat4,
            })
            .collect(),
        powered_semantic: PoweredSettings {
            model: cfg.model.clone(),
            n_per_method: 100,
            tasks: 20,
            repeats: 5,
            retries: 1,
            max_tokens: budgets(cfg, &StrategyName::MAIN),
        },
        powered_latency: PoweredSettings {
            model: cfg.model.clone(),
            n_per_method: 40,
            tasks: 20,
            repeats: 2,
            retries: 1,
            max_tokens: budgets(
                cfg,
                &[StrategyName::SimpleCga, StrategyName::EuclideanMat4, StrategyName::CompactSe3],
            ),
        },
        seed: cfg.seed,
    }
}
