//! HTTP front for a synthesized interface spec: the UI reads the interface spec,
//! posts widget states, and gets back the rewritten query and its result.

pub mod backend;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pi_core::ast::AstNode;
use pi_core::pipeline::{apply_widgets, ApplyError, InterfaceSpec, WidgetState};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json_};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

pub use backend::{Backend, BackendError, ResultTable, SqliteBackend};

#[derive(Clone)]
struct AppState {
    spec: Arc<InterfaceSpec>,
    /// Serialized once; the interface spec never changes after startup.
    spec_json: Arc<str>,
    backend: Arc<dyn Backend>,
}

#[derive(Debug, Default, Deserialize)]
pub struct ApplyRequest {
    #[serde(default)]
    pub state: WidgetState,
    /// Query the state applies to instead of the interface's initial one.
    #[serde(default)]
    pub base: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ApplyResponse {
    pub sql: String,
    pub ast: AstNode,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Json_>>,
}

#[derive(Debug)]
enum ApiError {
    Apply(ApplyError),
    Body(JsonRejection),
    Backend,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Apply(e) => {
                let status = match e {
                    ApplyError::UnknownInterface(_) | ApplyError::UnknownWidget(_) => StatusCode::NOT_FOUND,
                    _ => StatusCode::UNPROCESSABLE_ENTITY,
                };
                let mut body = json!({ "error": kind(&e), "message": e.to_string() });
                if let ApplyError::DomainViolation { widget, value } = &e {
                    body["widget"] = widget.as_str().into();
                    body["value"] = value.as_str().into();
                }
                (status, body)
            }
            ApiError::Body(r) => (StatusCode::BAD_REQUEST, json!({ "error": "BadRequest", "message": r.body_text() })),
            // backend messages may carry schema details; keep them in the log
            ApiError::Backend => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": "BackendError", "message": "query execution failed" })),
        };
        (status, Json(body)).into_response()
    }
}

fn kind(e: &ApplyError) -> &'static str {
    match e {
        ApplyError::UnknownInterface(_) => "UnknownInterface",
        ApplyError::UnknownWidget(_) => "UnknownWidget",
        ApplyError::DomainViolation { .. } => "DomainViolation",
        ApplyError::PathNotFound { .. } => "PathNotFound",
        ApplyError::Ast { .. } => "InvalidEdit",
        ApplyError::Query(_) => "InvalidQuery",
    }
}

async fn health() -> Json<Json_> {
    Json(json!({ "status": "ok" }))
}

async fn interfaces(State(s): State<AppState>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], s.spec_json.to_string())
}

async fn apply(
    State(s): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ApplyRequest>, JsonRejection>,
) -> Result<Json<ApplyResponse>, ApiError> {
    let Json(req) = body.map_err(ApiError::Body)?;
    let (sql, ast) = apply_widgets(&s.spec, &id, &req.state, req.base.as_deref()).map_err(ApiError::Apply)?;
    let backend = s.backend.clone();
    let query = sql.clone();
    let table = tokio::task::spawn_blocking(move || backend.execute(&query))
        .await
        .map_err(|e| {
            tracing::error!(error = %e, "executor task failed");
            ApiError::Backend
        })?
        .map_err(|e| {
            tracing::error!(error = %e, %sql, "backend rejected query");
            ApiError::Backend
        })?;
    Ok(Json(ApplyResponse { sql, ast, columns: table.columns, rows: table.rows }))
}

/// The API routes; `assets`, when given, is served under `/` for the UI.
pub fn router(spec: InterfaceSpec, backend: Arc<dyn Backend>, assets: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/interfaces", get(interfaces))
        .route("/api/interfaces/{id}/apply", post(apply))
        .with_state(AppState { spec_json: spec.to_json().into(), spec: Arc::new(spec), backend });
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve_on(listener: TcpListener, app: Router) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "serving");
    axum::serve(listener, app).await
}

pub async fn serve(spec: InterfaceSpec, backend: Arc<dyn Backend>, addr: SocketAddr, assets: Option<PathBuf>) -> std::io::Result<()> {
    serve_on(TcpListener::bind(addr).await?, router(spec, backend, assets)).await
}
