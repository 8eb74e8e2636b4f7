//! Editing sessions: one scene, the steps accepted so far, and the snapshots
//! needed to undo them.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use motorscene_core::evaluation::{check_parse, execute_parsed, OutputKind};
use motorscene_core::scene::{default_scene, generate_large_scene, Scene, SceneDocument};
use motorscene_core::templates::{plan, route, Route, SpatialRelation};
use motorscene_gateway::{complete, scene_context_render, GatewayConfig, Provider, RetryPolicy, StrategyName};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Objects listed in the LLM prompt; larger scenes are truncated.
pub const CONTEXT_LIMIT: usize = 30;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown session '{0}'")]
    UnknownSession(String),
    #[error("unknown strategy '{0}'")]
    UnknownStrategy(String),
    #[error("unknown scene fixture '{0}'")]
    UnknownFixture(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("nothing to undo")]
    EmptyHistory,
    #[error("journal: {0}")]
    Journal(String),
}

/// Where the instruction is handled and what the model (or template) gets to use.
pub struct Engine {
    provider: Option<Arc<dyn Provider>>,
    config: GatewayConfig,
    policy: RetryPolicy,
}

impl Engine {
    /// No model access: known keywords use templates, everything else falls back.
    pub fn templates_only() -> Self {
        Engine {
            provider: None,
            config: GatewayConfig::default(),
            policy: RetryPolicy::default(),
        }
    }

    pub fn with_provider(provider: Arc<dyn Provider>, config: GatewayConfig, policy: RetryPolicy) -> Self {
        Engine {
            provider: Some(provider),
            config,
            policy,
        }
    }

    pub fn llm_available(&self) -> bool {
        self.provider.is_some()
    }
}

pub fn scene_fixture(name: &str) -> Result<Scene, SessionError> {
    if name == "default" {
        return Ok(default_scene());
    }
    // "generated:<count>:<seed>"
    let parts: Vec<&str> = name.split(':').collect();
    if let ["generated", count, seed] = parts.as_slice() {
        if let (Ok(count), Ok(seed)) = (count.parse(), seed.parse()) {
            return Ok(generate_large_scene(count, seed));
        }
    }
    Err(SessionError::UnknownFixture(name.to_string()))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepLatency {
    pub api_s: f64,
    pub parse_execute_s: f64,
    pub render_ready_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepVerdict {
    pub parse_ok: bool,
    pub execute_ok: bool,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    /// "template", "llm", "parse" or "execute".
    pub stage: String,
    pub message: String,
    /// Model attempts spent before giving up.
    #[serde(default)]
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub index: usize,
    pub instruction: String,
    pub route: Route,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_keyword: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<SpatialRelation>,
    /// The request text that was executed (template JSON or model reply).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_text: Option<String>,
    pub strategy: StrategyName,
    pub output_kind: OutputKind,
    pub verdict: StepVerdict,
    pub latency: StepLatency,
    pub attempts: u32,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub before_revision: u64,
    pub after_revision: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

impl Step {
    pub fn accepted(&self) -> bool {
        self.failure.is_none()
    }
}

/// One journal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum JournalEvent {
    Create {
        id: String,
        strategy: StrategyName,
        created_at: String,
        scene: SceneDocument,
    },
    Apply {
        instruction: String,
        route: Route,
        output_kind: OutputKind,
        request_text: String,
    },
    Undo,
}

pub struct Session {
    pub id: String,
    pub strategy: StrategyName,
    pub created_at: String,
    scene: Scene,
    history: Vec<Step>,
    /// Scene before each accepted step, parallel to `history`.
    snapshots: Vec<Scene>,
    rejected: Vec<Step>,
    journal: Option<PathBuf>,
}

struct Emitted {
    route: Route,
    relation: Option<SpatialRelation>,
    kind: OutputKind,
    text: String,
    api_s: f64,
    attempts: u32,
    prompt_tokens: u64,
    completion_tokens: u64,
}

impl Session {
    pub fn new(id: impl Into<String>, strategy: StrategyName, scene: Scene) -> Self {
        Session {
            id: id.into(),
            strategy,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            scene,
            history: Vec::new(),
            snapshots: Vec::new(),
            rejected: Vec::new(),
            journal: None,
        }
    }

    /// Starts a journal at `path`, recording the creation event.
    pub fn with_journal(mut self, path: impl Into<PathBuf>) -> Result<Self, SessionError> {
        let path = path.into();
        let create = JournalEvent::Create {
            id: self.id.clone(),
            strategy: self.strategy,
            created_at: self.created_at.clone(),
            scene: self.scene.to_document(),
        };
        File::create(&path).map_err(|e| SessionError::Journal(e.to_string()))?;
        self.journal = Some(path);
        self.log(&create)?;
        Ok(self)
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn history(&self) -> &[Step] {
        &self.history
    }

    pub fn rejected(&self) -> &[Step] {
        &self.rejected
    }

    fn log(&self, event: &JournalEvent) -> Result<(), SessionError> {
        let Some(path) = &self.journal else { return Ok(()) };
        let mut f = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| SessionError::Journal(e.to_string()))?;
        let line = serde_json::to_string(event).expect("journal events serialize");
        writeln!(f, "{line}").map_err(|e| SessionError::Journal(e.to_string()))
    }

    fn template(&self, instruction: &str, route: Route) -> Result<Emitted, Failure> {
        let (relation, request) = plan(instruction, &self.scene).map_err(|e| Failure {
            stage: "template".into(),
            message: e.to_string(),
            attempts: 0,
        })?;
        Ok(Emitted {
            route,
            relation: Some(relation),
            kind: OutputKind::CgaJson,
            text: serde_json::to_string(&request.assignments).expect("requests serialize"),
            api_s: 0.0,
            attempts: 0,
            prompt_tokens: 0,
            completion_tokens: 0,
        })
    }

    fn llm(&self, instruction: &str, engine: &Engine) -> Result<Emitted, Failure> {
        let provider = engine.provider.as_ref().ok_or_else(|| Failure {
            stage: "llm".into(),
            message: "no model provider configured".into(),
            attempts: 0,
        })?;
        let strategy = engine.config.strategy(self.strategy);
        let context = scene_context_render(&self.scene, Some(CONTEXT_LIMIT));
        let completion = complete(provider.as_ref(), &strategy, &context, instruction, &engine.policy, |raw| {
            check_parse(raw, strategy.output_kind).parse_ok
        });
        let attempts = completion.records.len() as u32;
        let api_s = completion.api_latency_s();
        match completion.accepted() {
            Some(rec) => Ok(Emitted {
                route: Route::Llm,
                relation: None,
                kind: strategy.output_kind,
                text: rec.raw_text.clone(),
                api_s,
                attempts,
                prompt_tokens: completion.records.iter().map(|r| r.prompt_tokens).sum(),
                completion_tokens: completion.records.iter().map(|r| r.completion_tokens).sum(),
            }),
            None => {
                let last = completion.final_record();
                let message = match last.and_then(|r| r.error.clone()) {
                    Some(err) => format!("provider error: {err}"),
                    None => format!("no parseable reply in {attempts} attempt(s)"),
                };
                Err(Failure {
                    stage: "llm".into(),
                    message,
                    attempts,
                })
            }
        }
    }

    /// Template for known keywords, the model for anything else, and the other
    /// engine when the first one cannot produce a request.
    fn emit(&self, instruction: &str, engine: &Engine) -> (Option<String>, Result<Emitted, Failure>) {
        let decision = route(instruction, engine.llm_available());
        let emitted = match decision.route {
            Route::Template => self.template(instruction, Route::Template).or_else(|first| {
                if engine.llm_available() {
                    self.llm(instruction, engine).map_err(|second| join(first, second))
                } else {
                    Err(first)
                }
            }),
            Route::Llm => self
                .llm(instruction, engine)
                .or_else(|first| self.template(instruction, Route::FallbackTemplate).map_err(|second| join(first, second))),
            Route::FallbackTemplate => self.template(instruction, Route::FallbackTemplate),
        };
        (decision.matched_keyword, emitted)
    }

    /// Applies one instruction. Failures are returned as a step with
    /// `failure` set and leave the scene untouched.
    pub fn apply(&mut self, instruction: &str, engine: &Engine) -> Result<Step, SessionError> {
        let started = Instant::now();
        let before = self.scene.revision();
        let (matched_keyword, emitted) = self.emit(instruction, engine);
        let mut step = Step {
            index: self.history.len(),
            instruction: instruction.to_string(),
            route: route(instruction, engine.llm_available()).route,
            matched_keyword,
            relation: None,
            request_text: None,
            strategy: self.strategy,
            output_kind: self.strategy.output_kind(),
            verdict: StepVerdict {
                parse_ok: false,
                execute_ok: false,
                diagnostics: Vec::new(),
            },
            latency: StepLatency::default(),
            attempts: 0,
            prompt_tokens: 0,
            completion_tokens: 0,
            before_revision: before,
            after_revision: before,
            failure: None,
        };
        let emitted = match emitted {
            Ok(e) => e,
            Err(f) => {
                step.attempts = f.attempts;
                step.latency.total_s = started.elapsed().as_secs_f64();
                step.failure = Some(f);
                self.rejected.push(step.clone());
                return Ok(step);
            }
        };
        step.route = emitted.route;
        step.relation = emitted.relation.clone();
        step.output_kind = emitted.kind;
        step.attempts = emitted.attempts;
        step.prompt_tokens = emitted.prompt_tokens;
        step.completion_tokens = emitted.completion_tokens;
        step.latency.api_s = emitted.api_s;
        step.request_text = Some(emitted.text.clone());

        let exec_started = Instant::now();
        let result = execute_text(&self.scene, &emitted.text, emitted.kind);
        step.latency.parse_execute_s = exec_started.elapsed().as_secs_f64();
        let after = match result {
            Ok((after, diagnostics)) => {
                step.verdict = StepVerdict {
                    parse_ok: true,
                    execute_ok: true,
                    diagnostics,
                };
                after
            }
            Err((parse_ok, failure)) => {
                step.verdict.parse_ok = parse_ok;
                step.verdict.diagnostics.push(failure.message.clone());
                step.failure = Some(failure);
                step.latency.total_s = started.elapsed().as_secs_f64();
                self.rejected.push(step.clone());
                return Ok(step);
            }
        };

        let render_started = Instant::now();
        std::hint::black_box(after.to_json());
        step.latency.render_ready_s = render_started.elapsed().as_secs_f64();
        step.after_revision = after.revision();
        step.latency.total_s = started.elapsed().as_secs_f64().max(step.latency.api_s);

        self.log(&JournalEvent::Apply {
            instruction: instruction.to_string(),
            route: emitted.route,
            output_kind: emitted.kind,
            request_text: emitted.text,
        })?;
        self.snapshots.push(std::mem::replace(&mut self.scene, after));
        self.history.push(step.clone());
        Ok(step)
    }

    /// Pops the last accepted step and restores the scene before it.
    pub fn undo(&mut self) -> Result<Step, SessionError> {
        let (Some(step), Some(scene)) = (self.history.last().cloned(), self.snapshots.last().cloned()) else {
            return Err(SessionError::EmptyHistory);
        };
        self.log(&JournalEvent::Undo)?;
        self.history.pop();
        self.snapshots.pop();
        self.scene = scene;
        Ok(step)
    }

    /// Rebuilds a session from its journal by re-executing the recorded
    /// requests; no provider is consulted.
    pub fn replay(path: &Path) -> Result<Session, SessionError> {
        let f = File::open(path).map_err(|e| SessionError::Journal(format!("{}: {e}", path.display())))?;
        let mut session: Option<Session> = None;
        for (n, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| SessionError::Journal(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let event: JournalEvent = serde_json::from_str(&line)
                .map_err(|e| SessionError::Journal(format!("{}:{}: {e}", path.display(), n + 1)))?;
            match (event, session.as_mut()) {
                (JournalEvent::Create { id, strategy, created_at, scene }, None) => {
                    let scene = Scene::try_from(scene).map_err(|e| SessionError::InvalidScene(e.to_string()))?;
                    let mut s = Session::new(id, strategy, scene);
                    s.created_at = created_at;
                    session = Some(s);
                }
                (JournalEvent::Apply { instruction, route, output_kind, request_text }, Some(s)) => {
                    let (after, diagnostics) = execute_text(&s.scene, &request_text, output_kind)
                        .map_err(|(_, f)| SessionError::Journal(format!("line {}: {}", n + 1, f.message)))?;
                    let step = Step {
                        index: s.history.len(),
                        instruction,
                        route,
                        matched_keyword: None,
                        relation: None,
                        request_text: Some(request_text),
                        strategy: s.strategy,
                        output_kind,
                        verdict: StepVerdict {
                            parse_ok: true,
                            execute_ok: true,
                            diagnostics,
                        },
                        latency: StepLatency::default(),
                        attempts: 0,
                        prompt_tokens: 0,
                        completion_tokens: 0,
                        before_revision: s.scene.revision(),
                        after_revision: after.revision(),
                        failure: None,
                    };
                    s.snapshots.push(std::mem::replace(&mut s.scene, after));
                    s.history.push(step);
                }
                (JournalEvent::Undo, Some(s)) => {
                    s.undo()?;
                }
                (_, _) => return Err(SessionError::Journal(format!("line {}: event out of order", n + 1))),
            }
        }
        let mut s = session.ok_or_else(|| SessionError::Journal("empty journal".into()))?;
        s.journal = Some(path.to_path_buf());
        Ok(s)
    }
}

fn join(first: Failure, second: Failure) -> Failure {
    let message = format!("{}: {}; {}: {}", first.stage, first.message, second.stage, second.message);
    Failure {
        stage: second.stage,
        message,
        attempts: first.attempts + second.attempts,
    }
}

/// Parses and executes a request with the executor for `kind`. On error,
/// reports whether parsing succeeded.
fn execute_text(scene: &Scene, text: &str, kind: OutputKind) -> Result<(Scene, Vec<String>), (bool, Failure)> {
    let check = check_parse(text, kind);
    let Some(parsed) = check.parsed else {
        return Err((
            false,
            Failure {
                stage: "parse".into(),
                message: check.diagnostics.join("; "),
                attempts: 0,
            },
        ));
    };
    let execution = execute_parsed(scene, &parsed);
    if !execution.all_ok() {
        return Err((
            true,
            Failure {
                stage: "execute".into(),
                message: execution.errors().join("; "),
                attempts: 0,
            },
        ));
    }
    Ok((execution.scene, execution.warnings))
}
