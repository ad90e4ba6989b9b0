//! JSON-over-HTTP interface consumed by the explorer front end.
//!
//! Every response body carries `api_version`; errors are
//! `{api_version, code, message, detail}` with a matching HTTP status.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dimcf::{
    aggregate_attribution, diverse_counterfactuals, Attribution, CfRequest, Error, ExplanationSet, Mapping,
    SolverOptions,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::session::{Session, SessionStore};

pub const API_VERSION: &str = "1";

/// Largest `k` accepted by the explain endpoint.
pub const MAX_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code: code.into(),
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no session '{id}'")).with_detail(json!({ "session": id }))
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Input(_) | Error::DimensionMismatch { .. } => Self::bad_request(message),
            Error::Infeasible { best, .. } => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "infeasible", message)
                .with_detail(json!({ "best": best })),
            Error::Solver { iteration, .. } => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "solver_failed", message)
                .with_detail(json!({ "iteration": iteration })),
            Error::Data { row, column, .. } => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "data_error", message)
                .with_detail(json!({ "row": row, "column": column })),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = json!({
            "api_version": API_VERSION,
            "code": self.code,
            "message": self.message,
            "detail": self.detail,
        });
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub method: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub output_dim: usize,
    pub feature_names: Vec<String>,
    /// `[height, width]` for SOM sessions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
}

fn session_info(id: &str, s: &Session) -> SessionInfo {
    SessionInfo {
        id: id.to_owned(),
        method: s.settings.projector.method().to_owned(),
        n_samples: s.dataset.n_samples(),
        n_features: s.dataset.n_features(),
        output_dim: s.projector.output_dim(),
        feature_names: s.dataset.feature_names.clone(),
        grid: match &s.projector {
            dimcf::Projector::Som(som) => Some([som.height, som.width]),
            _ => None,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingPoint {
    pub index: usize,
    pub label: i64,
    pub mapping: Mapping,
}

fn default_k() -> usize {
    3
}

fn default_c() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplainBody {
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub sample_index: Option<usize>,
    pub y_cf: Mapping,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub blacklist: Vec<usize>,
    #[serde(rename = "C", alias = "c", default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub solver: Option<SolverOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributionBody {
    pub sample_index: usize,
    pub targets: Vec<Mapping>,
    #[serde(rename = "C", alias = "c", default = "default_c")]
    pub c: f64,
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", get(list_sessions))
        .route("/sessions/{id}/embedding", get(embedding))
        .route("/sessions/{id}/explain", post(explain))
        .route("/sessions/{id}/attribution", post(attribution))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(store)
}

fn lookup(store: &SessionStore, id: &str) -> Result<Arc<Session>, ApiError> {
    store.get(id).ok_or_else(|| ApiError::not_found(id))
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_json", format!("malformed request body: {e}"))
            .with_detail(json!({ "line": e.line(), "column": e.column() }))
    })
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn list_sessions(State(store): State<Arc<SessionStore>>) -> Json<Value> {
    let sessions: Vec<SessionInfo> = store.iter().map(|(id, s)| session_info(id, s)).collect();
    Json(json!({ "api_version": API_VERSION, "sessions": sessions }))
}

async fn embedding(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = lookup(&store, &id)?;
    let info = session_info(&id, &session);
    let points = blocking(move || {
        let ds = &session.dataset;
        (0..ds.n_samples())
            .map(|i| {
                Ok(EmbeddingPoint {
                    index: i,
                    label: ds.labels[i],
                    mapping: session.projector.project(ds.sample(i))?,
                })
            })
            .collect::<Result<Vec<_>, Error>>()
            .map_err(ApiError::from)
    })
    .await?;
    Ok(Json(json!({
        "api_version": API_VERSION,
        "session": info,
        "points": points,
    })))
}

/// Resolves an explain body into a validated request.
pub fn explain_request(session: &Session, body: &ExplainBody) -> Result<CfRequest, ApiError> {
    let x = match (&body.x, body.sample_index) {
        (Some(x), None) => x.clone(),
        (None, Some(i)) => {
            if i >= session.dataset.n_samples() {
                return Err(ApiError::bad_request(format!(
                    "sample_index {i} out of range (session has {} samples)",
                    session.dataset.n_samples()
                )));
            }
            session.dataset.sample(i).to_vec()
        }
        _ => return Err(ApiError::bad_request("give exactly one of 'x' and 'sample_index'")),
    };
    if body.k < 1 || body.k > MAX_K {
        return Err(ApiError::bad_request(format!("k must be between 1 and {MAX_K}")));
    }
    session.projector.validate_target(&body.y_cf)?;
    let mut req = CfRequest::new(x, body.y_cf.clone())
        .with_blacklist(body.blacklist.clone())
        .with_c(body.c);
    if let Some(opts) = &body.solver {
        req = req.with_solver(opts.clone());
    }
    req.validate()?;
    Ok(req)
}

async fn explain(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let session = lookup(&store, &id)?;
    let body: ExplainBody = parse_body(&body)?;
    let set: ExplanationSet = blocking(move || {
        let req = explain_request(&session, &body)?;
        diverse_counterfactuals(&req, body.k, &session.projector).map_err(ApiError::from)
    })
    .await?;
    Ok(Json(json!({
        "api_version": API_VERSION,
        "session": id,
        "explanation": set,
    })))
}

async fn attribution(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let session = lookup(&store, &id)?;
    let body: AttributionBody = parse_body(&body)?;
    let feature_names = session.dataset.feature_names.clone();
    let result: Attribution = blocking(move || {
        let n = session.dataset.n_samples();
        if body.sample_index >= n {
            return Err(ApiError::bad_request(format!(
                "sample_index {} out of range (session has {n} samples)",
                body.sample_index
            )));
        }
        if !(body.c > 0.0 && body.c.is_finite()) {
            return Err(ApiError::bad_request("C must be positive and finite"));
        }
        for t in &body.targets {
            session.projector.validate_target(t)?;
        }
        aggregate_attribution(
            &session.projector,
            session.dataset.sample(body.sample_index),
            &body.targets,
            body.c,
            &SolverOptions::default(),
        )
        .map_err(ApiError::from)
    })
    .await?;
    Ok(Json(json!({
        "api_version": API_VERSION,
        "session": id,
        "feature_names": feature_names,
        "weights": result.weights,
        "solved": result.solved,
        "failed": result.failed,
        "uniform_fallback": result.uniform_fallback,
    })))
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(store: Arc<SessionStore>, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!(
        "serving {} session(s) from {} on http://{}",
        store.len(),
        store.dir().display(),
        listener.local_addr()?
    );
    axum::serve(listener, router(store)).await
}
