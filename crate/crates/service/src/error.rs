use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use hv_core::diff::EventParseError;
use hv_core::engine::EngineError;
use hv_core::ingest::{FatalKind, ParseFatal};
use hv_core::store::StoreError;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("request body is not valid UTF-8")]
    Utf8,
    #[error("model document rejected: {0}")]
    Model(ParseFatal),
    #[error("event batch rejected: {0}")]
    Events(#[from] EventParseError),
    #[error("model '{0}' not found")]
    NotFound(String),
    #[error("body is for model '{got}', not '{expected}'")]
    ModelIdMismatch { expected: String, got: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("invalid query: {0}")]
    Query(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{0}")]
    Internal(String),
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Utf8 | ApiError::Events(_) | ApiError::Query(_) => StatusCode::BAD_REQUEST,
            ApiError::Model(f) if f.kind == FatalKind::DuplicateId => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Model(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::ModelIdMismatch { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Engine(EngineError::ResyncRequired { .. }) => StatusCode::CONFLICT,
            ApiError::Engine(EngineError::StaleEvent(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Store(_) | ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        let (code, detail) = match self {
            ApiError::Utf8 => ("invalidEncoding", None),
            ApiError::Model(f) if f.kind == FatalKind::DuplicateId => ("duplicateId", Some(json!({ "path": f.path }))),
            ApiError::Model(f) => ("parseError", Some(json!({ "path": f.path, "kind": f.kind }))),
            ApiError::Events(e) => ("invalidEvents", Some(json!({ "index": e.index }))),
            ApiError::NotFound(id) => ("notFound", Some(json!({ "modelId": id }))),
            ApiError::ModelIdMismatch { expected, got } => {
                ("modelIdMismatch", Some(json!({ "expected": expected, "got": got })))
            }
            ApiError::Engine(EngineError::ResyncRequired { expected, got }) => {
                ("resyncRequired", Some(json!({ "expectedSeq": expected, "gotSeq": got })))
            }
            ApiError::Engine(EngineError::StaleEvent(e)) => {
                ("staleEvent", Some(json!({ "seq": e.seq, "elementId": e.element_id })))
            }
            ApiError::Query(_) => ("invalidQuery", None),
            ApiError::Store(_) | ApiError::Internal(_) => ("internal", None),
        };
        ErrorBody { code, message: self.to_string(), detail }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        } else {
            tracing::debug!(error = %self, "request rejected");
        }
        (status, Json(self.body())).into_response()
    }
}
