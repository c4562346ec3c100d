//! Local HTTP API over the store, plus the review UI's static assets.
//!
//! There is no authentication; the service binds to loopback unless told
//! otherwise.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use refactor_guard_core::validation::ConfidenceLevel;
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::proposal::ProposalStatus;
use crate::store::{Filter, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot listen on {addr}: address already in use")]
    PortInUse { addr: SocketAddr },
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("service failed: {0}")]
    Serve(#[source] std::io::Error),
}

struct ApiError(StatusCode, &'static str, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.2, "code": self.1 }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let (status, code) = match &e {
            StoreError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            StoreError::AlreadyDecided { .. } => (StatusCode::CONFLICT, "already_decided"),
            StoreError::SourceDrifted { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "source_drifted"),
            StoreError::Invariant(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid"),
            StoreError::Io { .. } | StoreError::Corrupt { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError(status, code, e.to_string())
    }
}

fn bad_request(message: String) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, "bad_request", message)
}

type Shared = Arc<Store>;

/// Store calls touch the filesystem; keep them off the async workers.
async fn blocking<T: Send + 'static>(
    store: &Shared,
    f: impl FnOnce(&Store) -> Result<T, StoreError> + Send + 'static,
) -> Result<T, ApiError> {
    let store = Arc::clone(store);
    tokio::task::spawn_blocking(move || f(&store))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

#[derive(Deserialize)]
struct ListQuery {
    status: Option<String>,
    confidence: Option<String>,
}

fn parse_confidence(s: &str) -> Result<ConfidenceLevel, String> {
    match s.to_ascii_lowercase().as_str() {
        "high" => Ok(ConfidenceLevel::High),
        "mid" => Ok(ConfidenceLevel::Mid),
        _ => Err(format!("unknown confidence '{s}' (expected High or Mid)")),
    }
}

async fn list(State(store): State<Shared>, Query(q): Query<ListQuery>) -> Result<impl IntoResponse, ApiError> {
    let nonempty = |v: Option<String>| v.filter(|s| !s.is_empty());
    let filter = Filter {
        status: nonempty(q.status).map(|s| s.parse::<ProposalStatus>()).transpose().map_err(bad_request)?,
        confidence: nonempty(q.confidence).map(|s| parse_confidence(&s)).transpose().map_err(bad_request)?,
    };
    Ok(Json(blocking(&store, move |s| s.list(filter)).await?))
}

async fn detail(State(store): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(&store, move |s| s.get(&id)).await?))
}

async fn accept(State(store): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(&store, move |s| s.accept(&id)).await?))
}

#[derive(Deserialize, Default)]
struct RejectBody {
    reason: Option<String>,
}

async fn reject(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> Result<impl IntoResponse, ApiError> {
    // The body is optional; when present it must be the documented shape.
    let body: RejectBody = if body.iter().all(u8::is_ascii_whitespace) {
        RejectBody::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| bad_request(format!("invalid body: {e}")))?
    };
    Ok(Json(blocking(&store, move |s| s.reject(&id, body.reason)).await?))
}

async fn summary(State(store): State<Shared>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(&store, |s| s.summary()).await?))
}

async fn api_not_found() -> ApiError {
    ApiError(StatusCode::NOT_FOUND, "not_found", "no such endpoint".into())
}

const PLACEHOLDER: &str = "<!doctype html><title>refactor-guard</title>\
<p>The review UI is not installed. Point <code>--ui-dir</code> at its build output, \
or use the JSON API under <a href=\"/api/proposals\">/api/proposals</a>.</p>";

pub fn router(store: Arc<Store>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/proposals", get(list))
        .route("/proposals/{id}", get(detail))
        .route("/proposals/{id}/accept", post(accept))
        .route("/proposals/{id}/reject", post(reject))
        .route("/summary", get(summary))
        .fallback(api_not_found)
        .with_state(store);
    let app = Router::new().nest("/api", api);
    match ui_dir.filter(|d| d.is_dir()) {
        Some(dir) => app.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => app.fallback(|| async { Html(PLACEHOLDER) }),
    }
}

pub async fn bind(addr: SocketAddr) -> Result<tokio::net::TcpListener, ServiceError> {
    tokio::net::TcpListener::bind(addr).await.map_err(|source| match source.kind() {
        std::io::ErrorKind::AddrInUse => ServiceError::PortInUse { addr },
        _ => ServiceError::Bind { addr, source },
    })
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    store: Arc<Store>,
    ui_dir: Option<PathBuf>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    axum::serve(listener, router(store, ui_dir))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(ServiceError::Serve)
}
