//! HTTP API over the query pipeline.
//!
//! - `GET /api/relations` returns the catalog export.
//! - `POST /api/query` takes `{"sql": "...", "optimize": bool}` and returns
//!   the renderings, the rewrite trace and the rows at every node.
//!
//! User errors are answered with status 400 and
//! `{"ok": false, "error": {"kind", "position"?, "message"}}`. Bodies larger
//! than [`Config::max_body_bytes`] are rejected with 413.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use relplay_core::render::{to_latex, to_unicode, tree, TreeNode};
use relplay_core::{run_query, Catalog, EvalResult, Position, QueryError, RewriteTrace, DEFAULT_ROW_LIMIT};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_BODY_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone)]
pub struct Config {
    pub max_body_bytes: usize,
    /// Per-node row cap passed to the evaluator.
    pub row_limit: usize,
    /// Directory of static UI assets served under `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config { max_body_bytes: DEFAULT_MAX_BODY_BYTES, row_limit: DEFAULT_ROW_LIMIT, static_dir: None }
    }
}

#[derive(Clone)]
struct AppState {
    catalog: Arc<Catalog>,
    row_limit: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub sql: String,
    #[serde(default)]
    pub optimize: bool,
}

#[derive(Debug, Serialize)]
pub struct QueryResponse {
    pub ok: bool,
    pub unicode: String,
    pub latex: String,
    pub tree: TreeNode,
    pub trace: RewriteTrace,
    pub nodes: Vec<EvalResult>,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct ErrorResponse {
    pub ok: bool,
    pub error: ErrorBody,
}

impl ErrorResponse {
    fn new(kind: &'static str, position: Option<Position>, message: String) -> Self {
        ErrorResponse { ok: false, error: ErrorBody { kind, position, message } }
    }
}

impl From<QueryError> for ErrorResponse {
    fn from(e: QueryError) -> Self {
        ErrorResponse::new(e.kind(), e.position(), e.to_string())
    }
}

impl IntoResponse for ErrorResponse {
    fn into_response(self) -> Response {
        (StatusCode::BAD_REQUEST, Json(self)).into_response()
    }
}

pub fn router(catalog: Arc<Catalog>, config: &Config) -> Router {
    let state = AppState { catalog, row_limit: config.row_limit };
    let api = Router::new()
        .route("/api/relations", get(relations))
        .route("/api/query", post(query))
        .layer(DefaultBodyLimit::max(config.max_body_bytes))
        .with_state(state);
    let app = match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(CorsLayer::permissive())
}

async fn relations(State(state): State<AppState>) -> Response {
    Json(state.catalog.export()).into_response()
}

async fn query(State(state): State<AppState>, body: Bytes) -> Result<Json<QueryResponse>, ErrorResponse> {
    let request: QueryRequest = serde_json::from_slice(&body)
        .map_err(|e| ErrorResponse::new("request", None, format!("malformed request body: {e}")))?;
    Ok(Json(answer(&state.catalog, &request, state.row_limit)?))
}

/// Run one request through the pipeline without going through HTTP.
pub fn answer(catalog: &Catalog, request: &QueryRequest, row_limit: usize) -> Result<QueryResponse, QueryError> {
    let out = run_query(&request.sql, catalog, request.optimize, row_limit)?;
    Ok(QueryResponse {
        ok: true,
        unicode: to_unicode(&out.expr),
        latex: to_latex(&out.expr),
        tree: tree(&out.expr, Some(&out.results)),
        trace: out.trace,
        nodes: out.results,
    })
}
