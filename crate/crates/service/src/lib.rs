//! Local HTTP service backing the trace explorer.
//!
//! A session holds one trace and a versioned model. Slices are computed on
//! immutable snapshots of both, so concurrent slice requests never block each
//! other; loads and rule edits take the session's write lock.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | [`LoadRequest`] |
//! | GET | `/sessions/{id}/trace` | |
//! | POST | `/sessions/{id}/slice` | [`SliceRequest`] |
//! | GET | `/sessions/{id}/deps/{event}?mode=` | |
//! | PUT | `/sessions/{id}/rules` | array of cause-effect rules |
//! | GET | `/sessions/{id}/history` | |

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tracelens_core::{
    slice_with, CauseEffectRule, DependencyEdge, DependencyEngine, Error as CoreError, EventTrace, LsruReading,
    ModelFile, SliceMode, SliceOptions, SystemModel, TraceFormat,
};

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown session `{0}`")]
    NoSession(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{message}")]
    Unprocessable { message: String, line: Option<usize> },
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::TraceParse { line, .. } => ApiError::Unprocessable { message: e.to_string(), line },
            CoreError::IndexOutOfRange { .. } | CoreError::NotAMember(_) => ApiError::BadRequest(e.to_string()),
            CoreError::Model(_) | CoreError::UnknownResource(_) => {
                ApiError::Unprocessable { message: e.to_string(), line: None }
            }
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, line) = match &self {
            ApiError::NoSession(_) => (StatusCode::NOT_FOUND, None),
            ApiError::BadRequest(_) => (StatusCode::BAD_REQUEST, None),
            ApiError::Unprocessable { line, .. } => (StatusCode::UNPROCESSABLE_ENTITY, *line),
        };
        (status, Json(ErrorBody { error: self.to_string(), line })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// One past slice, tagged with the model version that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub start: usize,
    pub mode: SliceMode,
    pub model_version: u64,
    pub slice_length: usize,
    pub trace_length: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub trace: Arc<EventTrace>,
    pub model: Arc<SystemModel>,
    pub model_version: u64,
    pub history: Vec<HistoryEntry>,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    id: String,
    trace: EventTrace,
    model: ModelFile,
    model_version: u64,
    history: Vec<HistoryEntry>,
}

impl Session {
    fn snapshot(&self) -> Snapshot {
        Snapshot {
            id: self.id.clone(),
            trace: (*self.trace).clone(),
            model: self.model.to_file(),
            model_version: self.model_version,
            history: self.history.clone(),
        }
    }

    fn from_snapshot(s: Snapshot) -> Result<Self, CoreError> {
        Ok(Session {
            id: s.id,
            trace: Arc::new(s.trace),
            model: Arc::new(SystemModel::from_file(s.model)?),
            model_version: s.model_version,
            history: s.history,
        })
    }
}

/// Shared service state: the session table and an optional snapshot directory.
#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<RwLock<Session>>>>,
    snapshot_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    /// State that writes every session change to `dir/<id>.json` and starts
    /// with whatever sessions are already there.
    pub fn with_snapshots(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                match load_snapshot(&path) {
                    Ok(s) => {
                        sessions.insert(s.id.clone(), Arc::new(RwLock::new(s)));
                    }
                    Err(e) => log::warn!("skipping snapshot {}: {e}", path.display()),
                }
            }
        }
        log::info!("restored {} session(s) from {}", sessions.len(), dir.display());
        Ok(AppState { sessions: RwLock::new(sessions), snapshot_dir: Some(dir) })
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<_> = self.sessions.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    fn session(&self, id: &str) -> ApiResult<Arc<RwLock<Session>>> {
        self.sessions.read().unwrap().get(id).cloned().ok_or_else(|| ApiError::NoSession(id.to_string()))
    }

    fn persist(&self, session: &Session) {
        let Some(dir) = &self.snapshot_dir else { return };
        let path = dir.join(format!("{}.json", session.id));
        let tmp = path.with_extension("json.tmp");
        let body = serde_json::to_vec(&session.snapshot()).expect("snapshot serializes");
        if let Err(e) = std::fs::write(&tmp, body).and_then(|_| std::fs::rename(&tmp, &path)) {
            log::error!("failed to write snapshot {}: {e}", path.display());
        }
    }
}

fn load_snapshot(path: &Path) -> Result<Session, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let snap: Snapshot = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Session::from_snapshot(snap).map_err(|e| e.to_string())
}

/// Body of `POST /sessions`. `model` may be a JSON object or a string holding
/// the model file; when absent, a permissive model is inferred from the trace.
/// Naming an existing `session` reloads it: the model version is bumped and
/// history kept.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadRequest {
    pub trace: String,
    #[serde(default)]
    pub trace_format: Option<TraceFormat>,
    #[serde(default)]
    pub model: Option<serde_json::Value>,
    #[serde(default)]
    pub session: Option<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct LoadResponse {
    pub session: String,
    pub trace_length: usize,
    pub model_version: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceRequest {
    pub start: usize,
    #[serde(default)]
    pub mode: SliceMode,
    #[serde(default)]
    pub lsru_strict: bool,
}

#[derive(Debug, Deserialize)]
pub struct DepsQuery {
    #[serde(default)]
    pub mode: Option<SliceMode>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RulesResponse {
    pub model_version: u64,
    pub rules: usize,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(load))
        .route("/sessions/{id}/trace", get(trace))
        .route("/sessions/{id}/slice", post(slice))
        .route("/sessions/{id}/deps/{event}", get(deps))
        .route("/sessions/{id}/rules", put(rules))
        .route("/sessions/{id}/history", get(history))
        .with_state(state)
}

fn parse_model(value: Option<serde_json::Value>, trace: &EventTrace) -> ApiResult<SystemModel> {
    let model = match value {
        None | Some(serde_json::Value::Null) => return Ok(SystemModel::inferred_from(trace)),
        Some(serde_json::Value::String(text)) => SystemModel::parse(&text),
        Some(v) => serde_json::from_value::<ModelFile>(v)
            .map_err(|e| CoreError::Model(e.to_string()))
            .and_then(SystemModel::from_file),
    };
    Ok(model?)
}

async fn load(State(state): State<Arc<AppState>>, Json(req): Json<LoadRequest>) -> ApiResult<Response> {
    let format = req.trace_format.unwrap_or_else(|| TraceFormat::detect(None, &req.trace));
    let trace = EventTrace::parse(&req.trace, format)?;
    let model = parse_model(req.model, &trace)?;
    let trace_length = trace.len();

    if let Some(id) = req.session {
        let cell = state.session(&id)?;
        let mut s = cell.write().unwrap();
        s.trace = Arc::new(trace);
        s.model = Arc::new(model);
        s.model_version += 1;
        state.persist(&s);
        let body = LoadResponse { session: id, trace_length, model_version: s.model_version };
        return Ok((StatusCode::OK, Json(body)).into_response());
    }

    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session {
        id: id.clone(),
        trace: Arc::new(trace),
        model: Arc::new(model),
        model_version: 1,
        history: Vec::new(),
    };
    state.persist(&session);
    state.sessions.write().unwrap().insert(id.clone(), Arc::new(RwLock::new(session)));
    log::info!("session {id}: loaded {trace_length} events");
    let body = LoadResponse { session: id, trace_length, model_version: 1 };
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn trace(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<EventTrace>> {
    let cell = state.session(&id)?;
    let trace = cell.read().unwrap().trace.clone();
    Ok(Json((*trace).clone()))
}

fn json_body(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

async fn slice(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<SliceRequest>,
) -> ApiResult<Response> {
    let cell = state.session(&id)?;
    let (trace, model, version) = {
        let s = cell.read().unwrap();
        (s.trace.clone(), s.model.clone(), s.model_version)
    };
    let lsru = if req.lsru_strict { LsruReading::Literal } else { LsruReading::OtherProcesses };
    let opts = SliceOptions { mode: req.mode, lsru, ..Default::default() };
    let result = slice_with(&trace, &model, req.start, opts)?;

    {
        let mut s = cell.write().unwrap();
        s.history.push(HistoryEntry {
            start: result.start_index,
            mode: result.mode,
            model_version: version,
            slice_length: result.stats.slice_length,
            trace_length: result.stats.trace_length,
            members: result.members.iter().copied().collect(),
        });
        state.persist(&s);
    }
    Ok(json_body(result.to_json()))
}

async fn deps(
    State(state): State<Arc<AppState>>,
    UrlPath((id, event)): UrlPath<(String, usize)>,
    Query(q): Query<DepsQuery>,
) -> ApiResult<Json<Vec<DependencyEdge>>> {
    let cell = state.session(&id)?;
    let (trace, model) = {
        let s = cell.read().unwrap();
        (s.trace.clone(), s.model.clone())
    };
    let engine = DependencyEngine::new(&trace, &model);
    Ok(Json(engine.all_dependencies(event, q.mode.unwrap_or_default())?))
}

async fn rules(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(new_rules): Json<Vec<CauseEffectRule>>,
) -> ApiResult<Json<RulesResponse>> {
    let cell = state.session(&id)?;
    let mut s = cell.write().unwrap();
    let count = new_rules.len();
    s.model = Arc::new(s.model.with_rules(new_rules)?);
    s.model_version += 1;
    state.persist(&s);
    Ok(Json(RulesResponse { model_version: s.model_version, rules: count }))
}

async fn history(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Vec<HistoryEntry>>> {
    let cell = state.session(&id)?;
    let history = cell.read().unwrap().history.clone();
    Ok(Json(history))
}

/// Serves until ctrl-c.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("explorer service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
