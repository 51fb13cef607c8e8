//! HTTP session API.
//!
//! | route | |
//! |---|---|
//! | `POST /sessions` | `{environment, overrides}` → `{session_id}` |
//! | `GET /sessions/{id}/comparison` | pending comparison, or 204 while computing |
//! | `POST /sessions/{id}/verdict` | `{comparison_id, winner}` → `{accepted, next_iteration, duplicate}` |
//! | `GET /sessions/{id}/progress` | score, D and σ traces |
//! | `GET /sessions/{id}/archive` | every demonstration shown so far |
//!
//! Self-training runs on a blocking worker; requests never wait for it.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runlog::Verdict;
use crate::session::{CreateSession, SessionRecord, SessionStore, VerdictRejection};

struct Slot {
    record: Mutex<SessionRecord>,
    computing: AtomicBool,
    failure: Mutex<Option<String>>,
}

struct Inner {
    store: SessionStore,
    defaults: ExperimentConfig,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Loads every checkpoint in `store` and resumes sessions that were
    /// waiting on self-training. Must run inside a Tokio runtime.
    pub fn open(store: SessionStore, defaults: ExperimentConfig) -> Result<Self> {
        let records = store.load_all()?;
        let state = AppState(Arc::new(Inner {
            store,
            defaults,
            sessions: RwLock::new(HashMap::new()),
        }));
        for record in records {
            let id = record.id.clone();
            state.insert(record);
            state.ensure_proposal(&id);
        }
        Ok(state)
    }

    fn insert(&self, record: SessionRecord) -> Arc<Slot> {
        let slot = Arc::new(Slot {
            record: Mutex::new(record.clone()),
            computing: AtomicBool::new(false),
            failure: Mutex::new(None),
        });
        self.0
            .sessions
            .write()
            .expect("session map poisoned")
            .insert(record.id, slot.clone());
        slot
    }

    fn slot(&self, id: &str) -> std::result::Result<Arc<Slot>, ApiError> {
        self.0
            .sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session {id}")))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<_> = self.0.sessions.read().expect("session map poisoned").keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Starts self-training for `id` unless it is running or not needed.
    fn ensure_proposal(&self, id: &str) {
        let Ok(slot) = self.slot(id) else { return };
        if slot.computing.swap(true, Ordering::SeqCst) {
            return;
        }
        let snapshot = {
            let record = slot.record.lock().expect("session poisoned");
            if !record.needs_proposal() {
                slot.computing.store(false, Ordering::SeqCst);
                return;
            }
            record.state.clone()
        };
        let inner = self.0.clone();
        tokio::spawn(async move {
            let iteration = snapshot.iteration;
            let result = tokio::task::spawn_blocking(move || {
                let mut state = snapshot;
                state.propose()?;
                Ok::<_, april::Error>(state)
            })
            .await;
            let outcome = match result {
                Ok(Ok(state)) => {
                    let mut record = slot.record.lock().expect("session poisoned");
                    if record.state.iteration == iteration && record.state.pending.is_none() {
                        record.state = state;
                        inner.store.save(&record).err().map(|e| e.to_string())
                    } else {
                        None
                    }
                }
                Ok(Err(e)) => Some(e.to_string()),
                Err(e) => Some(e.to_string()),
            };
            *slot.failure.lock().expect("session poisoned") = outcome;
            slot.computing.store(false, Ordering::SeqCst);
        });
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ApiErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ApiErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ApiErrorBody {
                error: code.into(),
                message: message.into(),
            },
        }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed_request", rejection.body_text())
    }
}

impl From<HarnessError> for ApiError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::InvalidConfig(_) | HarnessError::Core(april::Error::InvalidArgument(_)) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_config", e.to_string())
            }
            other => Self::internal(other),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerdictRequest {
    pub comparison_id: u64,
    pub winner: Verdict,
}

async fn create_session(
    State(app): State<AppState>,
    body: std::result::Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Created>)> {
    let Json(request) = body?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let defaults = app.0.defaults.clone();
    let record = {
        let id = id.clone();
        tokio::task::spawn_blocking(move || SessionRecord::create(id, &request, &defaults))
            .await
            .map_err(ApiError::internal)??
    };
    app.0.store.save(&record)?;
    app.insert(record);
    app.ensure_proposal(&id);
    Ok((StatusCode::CREATED, Json(Created { session_id: id })))
}

async fn comparison(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let slot = app.slot(&id)?;
    if let Some(message) = slot.failure.lock().expect("session poisoned").clone() {
        return Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "self_training_failed", message));
    }
    let response = {
        let record = slot.record.lock().expect("session poisoned");
        if record.complete() {
            return Err(ApiError::new(StatusCode::GONE, "session_complete", "no further comparisons"));
        }
        record.comparison().map(|view| Json(view).into_response())
    };
    match response {
        Some(r) => Ok(r),
        None => {
            app.ensure_proposal(&id);
            Ok(StatusCode::NO_CONTENT.into_response())
        }
    }
}

async fn verdict(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: std::result::Result<Json<VerdictRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(request) = body?;
    let slot = app.slot(&id)?;
    let outcome = {
        let mut record = slot.record.lock().expect("session poisoned");
        let outcome = record.apply_verdict(request.comparison_id, request.winner)?;
        if matches!(outcome, Ok(ref a) if !a.duplicate) {
            app.0.store.save(&record)?;
        }
        outcome
    };
    match outcome {
        Ok(accepted) => {
            app.ensure_proposal(&id);
            Ok(Json(accepted).into_response())
        }
        Err(rejection) => {
            let (code, message) = match rejection {
                VerdictRejection::NotReady => ("not_ready", "the comparison is still being computed".to_string()),
                VerdictRejection::Stale { pending } => (
                    "stale_comparison",
                    match pending {
                        Some(p) => format!("pending comparison is {p}"),
                        None => "no comparison is pending".to_string(),
                    },
                ),
                VerdictRejection::Conflict => ("conflicting_verdict", "comparison already resolved the other way".to_string()),
                VerdictRejection::Complete => ("session_complete", "no further comparisons".to_string()),
            };
            Err(ApiError::new(StatusCode::CONFLICT, code, message))
        }
    }
}

async fn progress(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let slot = app.slot(&id)?;
    let record = slot.record.lock().expect("session poisoned");
    Ok(Json(record.progress()?).into_response())
}

async fn archive(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let slot = app.slot(&id)?;
    let record = slot.record.lock().expect("session poisoned");
    Ok(Json(record.archive()?).into_response())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/comparison", get(comparison))
        .route("/sessions/{id}/verdict", post(verdict))
        .route("/sessions/{id}/progress", get(progress))
        .route("/sessions/{id}/archive", get(archive))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(defaults: ExperimentConfig, store: SessionStore, addr: SocketAddr) -> Result<()> {
    let state = AppState::open(store, defaults)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| HarnessError::Io {
            path: addr.to_string().into(),
            source,
        })?;
    axum::serve(listener, router(state)).await.map_err(|source| HarnessError::Io {
        path: addr.to_string().into(),
        source,
    })
}
