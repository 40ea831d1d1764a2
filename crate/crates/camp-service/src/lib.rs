//! HTTP chat proxy around the protection pipeline.
//!
//! Endpoints:
//! - `POST /v1/chat`: process one user turn for a session (created on
//!   first contact), returning the de-masked response plus risk metadata.
//! - `GET /v1/session/{id}/risk`: redacted graph and registry snapshots.
//! - `GET /healthz`: liveness.
//!
//! Raw PII values never appear in metadata, the risk export, or logs; the
//! chat `response` field is the de-masked upstream reply addressed to the
//! trusted caller.

pub mod store;
pub mod upstream;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use camp_core::{
    ChatSession, EntityType, ExtractorError, GraphExport, PipelineError, RecognizerSet,
    RegistryExport, RiskConfig, RiskError, SensitivityWeights, UpstreamClient, WeightError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use store::SessionStore;
pub use upstream::HttpUpstreamClient;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Extractor(#[from] ExtractorError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Service configuration; flags and environment variables feed this.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub upstream_url: Option<String>,
    pub credential_env: String,
    pub model: String,
    pub tau: f64,
    pub alpha: f64,
    pub ttl: Duration,
    pub weight_override_path: Option<PathBuf>,
    pub gazetteer_dir: Option<PathBuf>,
    pub max_message_len: usize,
    pub expose_meta: bool,
    pub upstream_timeout: Duration,
    pub retry_upstream_once: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: 8080,
            upstream_url: None,
            credential_env: "CAMP_UPSTREAM_API_KEY".to_string(),
            model: "default".to_string(),
            tau: 2.0,
            alpha: 0.3,
            ttl: Duration::from_secs(1800),
            weight_override_path: None,
            gazetteer_dir: None,
            max_message_len: 16 * 1024,
            expose_meta: true,
            upstream_timeout: Duration::from_secs(30),
            retry_upstream_once: true,
        }
    }
}

struct StateInner {
    config: ServiceConfig,
    risk_template: RiskConfig,
    recognizers: Arc<RecognizerSet>,
    store: SessionStore,
    upstream: Arc<dyn UpstreamClient>,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<StateInner>,
}

impl AppState {
    /// Validates parameters, loads weight overrides and gazetteers, and
    /// wires the upstream client.
    pub fn new(
        config: ServiceConfig,
        upstream: Arc<dyn UpstreamClient>,
    ) -> Result<Self, ServiceError> {
        let weights = match &config.weight_override_path {
            Some(path) => SensitivityWeights::from_override_file(path)?,
            None => SensitivityWeights::standard(),
        };
        let recognizers = match &config.gazetteer_dir {
            Some(dir) => RecognizerSet::with_gazetteer_dir(weights.clone(), dir)?,
            None => RecognizerSet::with_defaults(weights.clone()),
        };
        let risk_template = RiskConfig::new(config.alpha, config.tau)?.with_weights(weights);
        Ok(AppState {
            inner: Arc::new(StateInner {
                store: SessionStore::new(config.ttl),
                config,
                risk_template,
                recognizers: Arc::new(recognizers),
                upstream,
            }),
        })
    }

    pub fn store(&self) -> &SessionStore {
        &self.inner.store
    }

    fn new_session(&self, id: &str) -> ChatSession {
        let seed = uuid::Uuid::new_v4().as_u128() as u64;
        ChatSession::new(
            id,
            self.inner.risk_template.clone(),
            seed,
            self.inner.recognizers.clone(),
        )
    }
}

// ── Wire types ──────────────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
pub struct ChatRequest {
    #[serde(default)]
    pub session_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChatMeta {
    pub cpe: f64,
    pub triggered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger_turn: Option<usize>,
    pub blocked_types: Vec<EntityType>,
}

#[derive(Debug, Serialize)]
pub struct ChatResponse {
    pub session_id: String,
    pub response: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<ChatMeta>,
}

#[derive(Debug, Serialize)]
pub struct RiskResponse {
    pub session_id: String,
    pub graph: GraphExport,
    pub registry: RegistryExport,
}

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("unknown or expired session")]
    SessionNotFound,
    #[error("upstream request failed; retry later")]
    UpstreamFailed,
    #[error("internal error")]
    Internal,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::SessionNotFound => StatusCode::NOT_FOUND,
            ApiError::UpstreamFailed => StatusCode::BAD_GATEWAY,
            ApiError::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = serde_json::json!({ "error": self.to_string() });
        (status, Json(body)).into_response()
    }
}

// ── Handlers ────────────────────────────────────────────────────────────

async fn handle_chat(
    State(state): State<AppState>,
    Json(request): Json<ChatRequest>,
) -> Result<Json<ChatResponse>, ApiError> {
    if request.message.is_empty() {
        return Err(ApiError::BadRequest("message must not be empty".to_string()));
    }
    if request.message.len() > state.inner.config.max_message_len {
        return Err(ApiError::BadRequest(format!(
            "message exceeds {} bytes",
            state.inner.config.max_message_len
        )));
    }

    let (session_id, handle, _created) = state
        .inner
        .store
        .get_or_create(request.session_id.as_deref(), |id| state.new_session(id));

    let upstream = state.inner.upstream.clone();
    let retry = state.inner.config.retry_upstream_once;
    let message = request.message;
    let worker_id = session_id.clone();
    // The pipeline blocks on the upstream call; keep it off the async
    // executor. The per-session lock serializes turns within a session.
    let result = tokio::task::spawn_blocking(move || {
        let mut entry = handle.lock();
        entry.touch();
        let mut outcome = entry.session.process_turn(&message, upstream.as_ref());
        if retry && matches!(outcome, Err(PipelineError::Upstream(_))) {
            tracing::warn!(session = %worker_id, "upstream failed; retrying once");
            outcome = entry.session.retry_dispatch(upstream.as_ref());
        }
        let response = outcome?;
        let meta = ChatMeta {
            cpe: entry.session.cpe(),
            triggered: entry.session.triggered(),
            trigger_turn: entry.session.trigger_turn().map(|t| t + 1),
            blocked_types: entry.session.blocked_types(),
        };
        Ok::<_, PipelineError>((response, meta))
    })
    .await
    .map_err(|_| ApiError::Internal)?;

    let (response, meta) = result.map_err(|e| match e {
        PipelineError::Upstream(err) => {
            tracing::warn!(session = %session_id, error = %err, "upstream failure surfaced");
            ApiError::UpstreamFailed
        }
        PipelineError::Registry(_) | PipelineError::Pseudonym(_) | PipelineError::NothingToSend => {
            ApiError::Internal
        }
    })?;

    tracing::info!(
        session = %session_id,
        cpe = meta.cpe,
        triggered = meta.triggered,
        "chat turn processed"
    );
    Ok(Json(ChatResponse {
        session_id,
        response,
        meta: state.inner.config.expose_meta.then_some(meta),
    }))
}

async fn handle_risk(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<RiskResponse>, ApiError> {
    let handle = state.inner.store.get(&id).ok_or(ApiError::SessionNotFound)?;
    let entry = handle.lock();
    Ok(Json(RiskResponse {
        session_id: id,
        graph: entry.session.graph_export(),
        registry: entry.session.registry_snapshot().export(),
    }))
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/chat", post(handle_chat))
        .route("/v1/session/{id}/risk", get(handle_risk))
        .route("/healthz", get(healthz))
        .with_state(state)
}


/// Bind and serve until the process exits; a background task sweeps
/// expired sessions without blocking request handling.
pub async fn serve(state: AppState) -> std::io::Result<()> {
    let port = state.inner.config.port;
    let sweep_state = state.clone();
    let ttl = state.inner.config.ttl;
    tokio::spawn(async move {
        let period = (ttl / 2).max(Duration::from_secs(1));
        let mut ticker = tokio::time::interval(period);
        loop {
            ticker.tick().await;
            sweep_state.inner.store.evict_expired();
        }
    });

    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    tracing::info!(port, "listening");
    axum::serve(listener, router(state)).await
}
