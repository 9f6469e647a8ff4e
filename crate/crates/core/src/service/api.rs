//! Local HTTP API for the triage UI.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use super::store::{ReportScope, RunStore, ServiceError, TriageFilter};
use crate::classify::Severity;
use crate::report::{CitationKey, ReportFormat, Verdict};

pub const DEFAULT_PORT: u16 = 8734;

#[derive(Clone)]
struct AppState {
    store: Arc<RunStore>,
    token: Option<Arc<str>>,
}

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        Self(e)
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = match &self.0 {
            ServiceError::UnknownRun(_) => (StatusCode::NOT_FOUND, "unknown_run"),
            ServiceError::UnknownCitation(_) => (StatusCode::NOT_FOUND, "unknown_citation"),
            ServiceError::UnknownPaper(_) => (StatusCode::NOT_FOUND, "unknown_paper"),
            ServiceError::StaleRun(_) => (StatusCode::GONE, "stale_run"),
            ServiceError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            ServiceError::Report(_) | ServiceError::Corrupt { .. } | ServiceError::Io(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        (status, Json(ErrorBody { error: code, message: self.0.to_string() })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Body of `POST /runs/{id}/verdicts`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictRequest {
    /// `paper:index`
    pub citation_key: String,
    pub decided_severity: Severity,
    pub reviewer: String,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub evidence_url: Option<String>,
    /// Defaults to the time the server receives the request.
    #[serde(default)]
    pub decided_at: Option<DateTime<Utc>>,
}

impl VerdictRequest {
    pub fn into_verdict(self, now: DateTime<Utc>) -> Result<Verdict, ServiceError> {
        let citation_key: CitationKey = self.citation_key.parse().map_err(ServiceError::BadRequest)?;
        if self.reviewer.trim().is_empty() {
            return Err(ServiceError::BadRequest("reviewer must not be empty".into()));
        }
        Ok(Verdict {
            citation_key,
            decided_severity: self.decided_severity,
            reviewer: self.reviewer,
            note: self.note,
            evidence_url: self.evidence_url.filter(|u| !u.trim().is_empty()),
            decided_at: self.decided_at.unwrap_or(now),
        })
    }
}

#[derive(Debug, Default, Deserialize)]
struct ReportQuery {
    scope: Option<String>,
    format: Option<String>,
}

async fn list_runs(State(st): State<AppState>) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.store.list_runs()?))
}

async fn triage(
    State(st): State<AppState>,
    Path(run): Path<String>,
    Query(filter): Query<TriageFilter>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(st.store.list_triage(&run, &filter)?))
}

async fn post_verdict(
    State(st): State<AppState>,
    Path(run): Path<String>,
    Json(req): Json<VerdictRequest>,
) -> ApiResult<impl IntoResponse> {
    let verdict = req.into_verdict(Utc::now())?;
    Ok((StatusCode::CREATED, Json(st.store.record_verdict(&run, verdict)?)))
}

async fn report(
    State(st): State<AppState>,
    Path(run): Path<String>,
    Query(q): Query<ReportQuery>,
) -> ApiResult<Response> {
    let scope: ReportScope = q.scope.as_deref().unwrap_or("corpus").parse().map_err(ServiceError::BadRequest)?;
    let format: ReportFormat = q.format.as_deref().unwrap_or("json").parse().map_err(ServiceError::BadRequest)?;
    let body = st.store.get_report(&run, &scope, format)?;
    let ctype = match format {
        ReportFormat::Json => "application/json",
        ReportFormat::Csv => "text/csv; charset=utf-8",
        ReportFormat::Text => "text/plain; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, ctype)], body).into_response())
}

async fn citation(State(st): State<AppState>, Path((run, key)): Path<(String, String)>) -> ApiResult<impl IntoResponse> {
    let key: CitationKey = key.parse().map_err(|_| ServiceError::UnknownCitation(key.clone()))?;
    Ok(Json(st.store.citation(&run, &key)?))
}

async fn require_token(State(st): State<AppState>, headers: HeaderMap, req: Request, next: Next) -> Response {
    if let Some(token) = &st.token {
        let given = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if given != Some(token.as_ref()) {
            let body = ErrorBody { error: "unauthorized", message: "missing or wrong bearer token".into() };
            return (StatusCode::UNAUTHORIZED, Json(body)).into_response();
        }
    }
    next.run(req).await
}

/// API routes; with `ui_dir`, everything else is served from that static bundle.
pub fn router(store: Arc<RunStore>, token: Option<String>, ui_dir: Option<PathBuf>) -> Router {
    let state = AppState { store, token: token.map(Arc::from) };
    let api = Router::new()
        .route("/runs", get(list_runs))
        .route("/runs/{id}/triage", get(triage))
        .route("/runs/{id}/verdicts", post(post_verdict))
        .route("/runs/{id}/report", get(report))
        .route("/runs/{id}/citations/{key}", get(citation))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, app: Router) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("triage API listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
