//! Benchmark suite definitions: blocks of tasks sharing a scene and token budgets.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use motorscene_core::evaluation::Task;
use motorscene_core::scene::{default_scene, generate_large_scene, Scene, SceneDocument};
use motorscene_gateway::{PromptStrategy, RetryPolicy, StrategyName};
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Where a block's starting scene comes from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SceneSpec {
    #[default]
    Default,
    Generated { count: usize, seed: u64 },
    File { path: PathBuf },
    Inline { document: SceneDocument },
}

impl SceneSpec {
    /// Relative `File` paths resolve against `base` (the suite file's directory).
    pub fn build(&self, base: Option<&Path>) -> Result<Scene, BenchError> {
        Ok(match self {
            SceneSpec::Default => default_scene(),
            SceneSpec::Generated { count, seed } => generate_large_scene(*count, *seed),
            SceneSpec::File { path } => {
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                Scene::from_path(&path).map_err(|e| BenchError::Suite(format!("scene {}: {e}", path.display())))?
            }
            SceneSpec::Inline { document } => Scene::try_from(document.clone())
                .map_err(|e| BenchError::Suite(format!("inline scene: {e}")))?,
        })
    }
}

/// What the retry loop treats as an acceptable reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidatorMode {
    /// Retry only on unparseable output (parse@k).
    #[default]
    Parse,
    /// Retry until parse and every semantic rule pass (semantic@k).
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    #[serde(default)]
    pub scene: SceneSpec,
    /// Cap on listed objects in the rendered context.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub max_tokens: BTreeMap<StrategyName, u32>,
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSuite {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub methods: Vec<StrategyName>,
    /// Attempt budgets to run; each produces its own set of rows.
    pub policies: Vec<u32>,
    pub trials_per_task: u32,
    #[serde(default)]
    pub validator: ValidatorMode,
    #[serde(default)]
    pub seed: u64,
    pub blocks: Vec<Block>,
}

/// One unit of work: a task under one method, trial and policy.
#[derive(Debug, Clone)]
pub struct Job<'a> {
    pub block: &'a Block,
    pub task: &'a Task,
    pub method: StrategyName,
    pub trial: u32,
    pub policy: RetryPolicy,
}

impl BenchmarkSuite {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let suite: BenchmarkSuite = serde_json::from_str(text).map_err(|e| BenchError::Suite(e.to_string()))?;
        suite.validate()?;
        Ok(suite)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Suite(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes")
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.methods.is_empty() {
            return Err(BenchError::Suite(format!("suite '{}' has no methods", self.name)));
        }
        if self.trials_per_task == 0 {
            return Err(BenchError::Suite("trials_per_task must be at least 1".into()));
        }
        if self.policies.is_empty() || self.policies.contains(&0) {
            return Err(BenchError::Suite("policies must be a nonempty list of attempt budgets >= 1".into()));
        }
        if self.tasks().next().is_none() {
            return Err(BenchError::Suite(format!("suite '{}' has no tasks", self.name)));
        }
        let mut seen = HashSet::new();
        for task in self.tasks() {
            if !seen.insert(task.id.as_str()) {
                return Err(BenchError::Suite(format!("duplicate task id '{}'", task.id)));
            }
            if let Some(only) = &task.methods {
                for m in only {
                    m.parse::<StrategyName>()
                        .map_err(|_| BenchError::Suite(format!("task '{}' names unknown method '{m}'", task.id)))?;
                }
            }
        }
        Ok(())
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Task> {
        self.blocks.iter().flat_map(|b| b.tasks.iter())
    }

    pub fn task_count(&self) -> usize {
        self.tasks().count()
    }

    /// Replaces the method set; unknown names are a config error.
    pub fn with_methods(mut self, methods: Vec<StrategyName>) -> Result<Self, BenchError> {
        if methods.is_empty() {
            return Err(BenchError::Suite("empty method set".into()));
        }
        self.methods = methods;
        Ok(self)
    }

    pub fn with_policies(mut self, policies: Vec<u32>) -> Result<Self, BenchError> {
        self.policies = policies;
        self.validate()?;
        Ok(self)
    }

    pub fn with_trials(mut self, trials: u32) -> Result<Self, BenchError> {
        self.trials_per_task = trials;
        self.validate()?;
        Ok(self)
    }

    fn runs_method(task: &Task, method: StrategyName) -> bool {
        task.methods
            .as_ref()
            .is_none_or(|only| only.iter().any(|m| m.parse::<StrategyName>().ok() == Some(method)))
    }

    /// Every (task, method, trial, policy) cell in a fixed order.
    pub fn jobs(&self) -> Vec<Job<'_>> {
        let mut jobs = Vec::new();
        for &k in &self.policies {
            let policy = RetryPolicy { max_attempts: k };
            for block in &self.blocks {
                for task in &block.tasks {
                    for &method in &self.methods {
                        if !Self::runs_method(task, method) {
                            continue;
                        }
                        for trial in 0..self.trials_per_task {
                            jobs.push(Job {
                                block,
                                task,
                                method,
                                trial,
                                policy,
                            });
                        }
                    }
                }
            }
        }
        jobs
    }

    /// Prompt strategy for a method inside a block, honoring per-block budgets.
    pub fn strategy(&self, block: &Block, method: StrategyName) -> PromptStrategy {
        let base = PromptStrategy::builtin(method);
        match block.max_tokens.get(&method) {
            Some(&n) => base.with_max_tokens(n),
            None => base,
        }
    }
}
