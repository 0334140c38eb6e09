//! HTTP gateway: clients push model snapshots or change-event batches and
//! pull or stream the resulting diagnostics.
//!
//! Routes:
//! - `PUT /models/{id}` canonical model document, optional `?lastSeq=`
//! - `GET /models/{id}` session record
//! - `POST /models/{id}/events` JSON array or NDJSON of change events
//! - `GET /models/{id}/inconsistencies?ruleId=&severity=&interactionId=`
//! - `GET /models/{id}/summary`
//! - `GET /models/{id}/stream?from=` server-sent delta records
//! - `GET /health`

mod error;
mod stream;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, RawQuery, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, Mutex};

use hv_core::diff::parse_events;
use hv_core::engine::{DiagnosticDelta, EngineState};
use hv_core::ingest::{parse_canonical, ParseOptions};
use hv_core::model::ElementId;
use hv_core::rules::{Diagnostic, RuleId, Severity};
use hv_core::store::{Filter, Store, Summary};

pub use error::{ApiError, ErrorBody};
pub use stream::{ResyncRecord, DELTA_EVENT, HEARTBEAT, RESYNC_EVENT};

pub const DEFAULT_PORT: u16 = 8787;
/// Environment variable read when no port flag is given.
pub const PORT_ENV: &str = "HV_PORT";
const BODY_LIMIT: usize = 256 * 1024 * 1024;
const FEED_CAPACITY: usize = 1024;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("{PORT_ENV}={value:?} is not a port number")]
    BadPort { value: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The flag wins over `HV_PORT`; without either the port is 8787.
pub fn resolve_port(flag: Option<u16>) -> Result<u16, ServeError> {
    if let Some(port) = flag {
        return Ok(port);
    }
    match std::env::var(PORT_ENV) {
        Ok(value) => value.trim().parse().map_err(|_| ServeError::BadPort { value }),
        Err(_) => Ok(DEFAULT_PORT),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionRecord {
    pub model_id: String,
    pub revision: u64,
    pub last_seq: u64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// What a stream subscriber receives from the writer side.
#[derive(Debug, Clone)]
enum Feed {
    Delta(Arc<DiagnosticDelta>),
    /// The model was replaced; subscribers must fetch it again.
    Reset,
}

struct Session {
    engine: Option<EngineState>,
    record: SessionRecord,
    feed: broadcast::Sender<Feed>,
}

#[derive(Clone, Default)]
pub struct AppState {
    inner: Arc<Inner>,
}

#[derive(Default)]
struct Inner {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    store: Store,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        AppState { inner: Arc::new(Inner { sessions: RwLock::default(), store }) }
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.inner
            .sessions
            .read()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_owned()))
    }

    fn session_or_create(&self, id: &str) -> Arc<Mutex<Session>> {
        let mut map = self.inner.sessions.write().expect("session map");
        let session = map.entry(id.to_owned()).or_insert_with(|| {
            let now = Utc::now();
            Arc::new(Mutex::new(Session {
                engine: None,
                record: SessionRecord { model_id: id.to_owned(), revision: 0, last_seq: 0, created_at: now, updated_at: now },
                feed: broadcast::channel(FEED_CAPACITY).0,
            }))
        });
        Arc::clone(session)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/models/:id", get(get_model).put(put_model))
        .route("/models/:id/events", post(post_events))
        .route("/models/:id/inconsistencies", get(get_inconsistencies))
        .route("/models/:id/summary", get(get_summary))
        .route("/models/:id/stream", get(stream::get_stream))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

pub async fn serve_listener(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "serving");
    axum::serve(listener, router(state)).await
}

pub async fn serve(addr: SocketAddr, state: AppState) -> Result<(), ServeError> {
    let listener = TcpListener::bind(addr).await?;
    serve_listener(listener, state).await?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
}

async fn health() -> Json<Health> {
    Json(Health { status: "ok", version: env!("CARGO_PKG_VERSION") })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PutModelResponse {
    pub revision: u64,
    pub last_seq: u64,
    pub diagnostics: Vec<Diagnostic>,
    pub summary: Summary,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PostEventsResponse {
    pub revision: u64,
    pub last_seq: u64,
    pub delta: DiagnosticDelta,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InconsistenciesResponse {
    pub revision: u64,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct PutQuery {
    last_seq: Option<u64>,
}

fn utf8(body: &Bytes) -> Result<&str, ApiError> {
    std::str::from_utf8(body).map_err(|_| ApiError::Utf8)
}

fn query<T: serde::de::DeserializeOwned>(raw: Option<&str>) -> Result<T, ApiError> {
    serde_urlencoded::from_str(raw.unwrap_or_default()).map_err(|e| ApiError::Query(e.to_string()))
}

async fn put_model(
    State(state): State<AppState>,
    Path(id): Path<String>,
    raw: RawQuery,
    body: Bytes,
) -> Result<Json<PutModelResponse>, ApiError> {
    let q: PutQuery = query(raw.0.as_deref())?;
    let model = parse_canonical(utf8(&body)?, ParseOptions::strict()).into_result().map_err(ApiError::Model)?.0;
    if model.model_id != id {
        return Err(ApiError::ModelIdMismatch { expected: id, got: model.model_id });
    }
    let last_seq = q.last_seq.unwrap_or(0);
    let (engine, diagnostics) = tokio::task::spawn_blocking(move || EngineState::init_at(model, last_seq))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    let revision = engine.revision();

    let session = state.session_or_create(&id);
    let mut session = session.lock().await;
    session.engine = Some(engine);
    session.record.revision = revision;
    session.record.last_seq = last_seq;
    session.record.updated_at = Utc::now();
    let entry = state.store().reset(&id, revision, diagnostics);
    let _ = session.feed.send(Feed::Reset);
    tracing::info!(model = %id, revision, diagnostics = entry.current.len(), "model replaced");
    Ok(Json(PutModelResponse {
        revision,
        last_seq,
        diagnostics: entry.current.clone(),
        summary: entry.summary.clone(),
    }))
}

async fn get_model(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionRecord>, ApiError> {
    let session = state.session(&id)?;
    let session = session.lock().await;
    if session.engine.is_none() {
        return Err(ApiError::NotFound(id));
    }
    Ok(Json(session.record.clone()))
}

async fn post_events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<PostEventsResponse>, ApiError> {
    let events = parse_events(utf8(&body)?)?;
    if let Some(e) = events.iter().find(|e| e.model_id != id) {
        return Err(ApiError::ModelIdMismatch { expected: id, got: e.model_id.clone() });
    }
    let session = state.session(&id)?;
    let mut guard = session.lock().await;
    let session = &mut *guard;
    let engine = session.engine.as_mut().ok_or_else(|| ApiError::NotFound(id.clone()))?;
    let before = engine.revision();
    let delta = engine.process(&events)?;
    let (revision, last_seq) = (engine.revision(), engine.last_seq());
    if revision != before {
        state.store().put_delta(&id, &delta)?;
        let _ = session.feed.send(Feed::Delta(Arc::new(delta.clone())));
        session.record.revision = revision;
        session.record.last_seq = last_seq;
        session.record.updated_at = Utc::now();
        tracing::info!(
            model = %id,
            revision,
            added = delta.added.len(),
            removed = delta.removed.len(),
            "events applied"
        );
    } else {
        tracing::debug!(model = %id, "duplicate batch dropped");
    }
    Ok(Json(PostEventsResponse { revision, last_seq, delta }))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct FilterQuery {
    rule_id: Option<String>,
    severity: Option<String>,
    interaction_id: Option<String>,
}

impl FilterQuery {
    fn into_filter(self) -> Result<Filter, ApiError> {
        Ok(Filter {
            rule_id: self.rule_id.map(|r| RuleId::from_str(&r).map_err(|e| ApiError::Query(e.to_string()))).transpose()?,
            severity: self
                .severity
                .map(|s| Severity::from_str(&s).map_err(|e| ApiError::Query(e.to_string())))
                .transpose()?,
            interaction_id: self.interaction_id.map(ElementId::from),
        })
    }
}

async fn get_inconsistencies(
    State(state): State<AppState>,
    Path(id): Path<String>,
    raw: RawQuery,
) -> Result<Json<InconsistenciesResponse>, ApiError> {
    let filter = query::<FilterQuery>(raw.0.as_deref())?.into_filter()?;
    if state.store().entry(&id).is_none() {
        return Err(ApiError::NotFound(id));
    }
    let view = state.store().get_current(&id, &filter);
    Ok(Json(InconsistenciesResponse { revision: view.revision, diagnostics: view.diagnostics }))
}

async fn get_summary(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Summary>, ApiError> {
    match state.store().entry(&id) {
        Some(entry) => Ok(Json(entry.summary.clone())),
        None => Err(ApiError::NotFound(id)),
    }
}
