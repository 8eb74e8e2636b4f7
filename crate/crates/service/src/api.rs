use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use motorscene_core::scene::{Scene, SceneDocument};
use motorscene_gateway::{registry, StrategyName};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;
use tower_http::cors::CorsLayer;

use crate::session::{scene_fixture, Engine, Session, SessionError, Step};

pub type SharedSession = Arc<Mutex<Session>>;

#[derive(Clone)]
pub struct AppState {
    engine: Arc<Engine>,
    sessions: Arc<RwLock<HashMap<String, SharedSession>>>,
    journal_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        AppState {
            engine: Arc::new(engine),
            sessions: Arc::default(),
            journal_dir: None,
        }
    }

    /// Journals every session under `dir` and restores the ones already there.
    pub fn with_journal_dir(mut self, dir: impl Into<PathBuf>) -> Result<Self, SessionError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| SessionError::Journal(format!("{}: {e}", dir.display())))?;
        let entries = std::fs::read_dir(&dir).map_err(|e| SessionError::Journal(e.to_string()))?;
        {
            let mut sessions = self.sessions.write().expect("session map poisoned");
            for entry in entries {
                let path = entry.map_err(|e| SessionError::Journal(e.to_string()))?.path();
                if path.extension().is_some_and(|e| e == "jsonl") {
                    let s = Session::replay(&path)?;
                    sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
                }
            }
        }
        self.journal_dir = Some(dir);
        Ok(self)
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("session map poisoned").keys().cloned().collect();
        ids.sort();
        ids
    }

    fn session(&self, id: &str) -> Result<SharedSession, ApiError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.to_string()).into())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/strategies", get(strategies))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/instructions", post(apply_instruction))
        .route("/sessions/{id}/scene", get(get_scene))
        .route("/sessions/{id}/history", get(get_history))
        .route("/sessions/{id}/undo", post(undo))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub struct ApiError(StatusCode, &'static str, String);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let (status, code) = match &e {
            SessionError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            SessionError::UnknownStrategy(_) => (StatusCode::BAD_REQUEST, "unknown_strategy"),
            SessionError::UnknownFixture(_) => (StatusCode::BAD_REQUEST, "unknown_fixture"),
            SessionError::InvalidScene(_) => (StatusCode::BAD_REQUEST, "invalid_scene"),
            SessionError::EmptyHistory => (StatusCode::CONFLICT, "empty_history"),
            SessionError::Journal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "journal"),
        };
        ApiError(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.1, "message": self.2}});
        (self.0, Json(body)).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub strategy: Option<String>,
    /// "default" or "generated:<count>:<seed>".
    #[serde(default)]
    pub fixture: Option<String>,
    #[serde(default)]
    pub scene: Option<SceneDocument>,
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub id: String,
    pub strategy: StrategyName,
    pub created_at: String,
    pub scene: SceneDocument,
}

#[derive(Debug, Deserialize)]
pub struct Instruction {
    pub instruction: String,
}

#[derive(Debug, Serialize)]
pub struct ApplyResponse {
    pub ok: bool,
    pub step: Step,
    pub scene: SceneDocument,
}

#[derive(Debug, Serialize)]
pub struct HistoryView {
    pub steps: Vec<Step>,
    pub rejected: Vec<Step>,
}

#[derive(Debug, Serialize)]
pub struct UndoResponse {
    pub undone: Step,
    pub scene: SceneDocument,
}

async fn health(State(state): State<AppState>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "llm_available": state.engine.llm_available(),
        "sessions": state.sessions.read().expect("session map poisoned").len(),
    }))
}

async fn strategies() -> Json<Value> {
    let list: Vec<Value> = registry()
        .into_iter()
        .map(|s| {
            json!({
                "name": s.name,
                "label": s.name.label(),
                "output_kind": s.output_kind,
                "max_tokens": s.max_tokens,
            })
        })
        .collect();
    Json(Value::Array(list))
}

async fn create_session(
    State(state): State<AppState>,
    body: Option<Json<CreateSession>>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let strategy = match req.strategy.as_deref() {
        None => StrategyName::SimpleCga,
        Some(name) => name
            .parse::<StrategyName>()
            .map_err(|_| SessionError::UnknownStrategy(name.to_string()))?,
    };
    let scene = match (req.scene, req.fixture.as_deref()) {
        (Some(doc), _) => Scene::try_from(doc).map_err(|e| SessionError::InvalidScene(e.to_string()))?,
        (None, Some(name)) => scene_fixture(name)?,
        (None, None) => scene_fixture("default")?,
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    let mut session = Session::new(id.clone(), strategy, scene);
    if let Some(dir) = &state.journal_dir {
        session = session.with_journal(dir.join(format!("{id}.jsonl")))?;
    }
    let view = SessionView {
        id: id.clone(),
        strategy,
        created_at: session.created_at.clone(),
        scene: session.scene().to_document(),
    };
    state
        .sessions
        .write()
        .expect("session map poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn apply_instruction(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<Instruction>,
) -> Result<Json<ApplyResponse>, ApiError> {
    if body.instruction.trim().is_empty() {
        return Err(ApiError(StatusCode::BAD_REQUEST, "empty_instruction", "instruction is empty".into()));
    }
    let shared = state.session(&id)?;
    // Holding the session lock for the whole step keeps edits to one session ordered.
    let mut session = shared.lock_owned().await;
    let engine = state.engine.clone();
    let (session, step) = tokio::task::spawn_blocking(move || {
        let step = session.apply(&body.instruction, &engine);
        (session, step)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    let step = step?;
    Ok(Json(ApplyResponse {
        ok: step.accepted(),
        step,
        scene: session.scene().to_document(),
    }))
}

async fn get_scene(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SceneDocument>, ApiError> {
    let shared = state.session(&id)?;
    let session = shared.lock().await;
    Ok(Json(session.scene().to_document()))
}

async fn get_history(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<HistoryView>, ApiError> {
    let shared = state.session(&id)?;
    let session = shared.lock().await;
    Ok(Json(HistoryView {
        steps: session.history().to_vec(),
        rejected: session.rejected().to_vec(),
    }))
}

async fn undo(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<UndoResponse>, ApiError> {
    let shared = state.session(&id)?;
    let mut session = shared.lock().await;
    let undone = session.undo()?;
    Ok(Json(UndoResponse {
        undone,
        scene: session.scene().to_document(),
    }))
}
