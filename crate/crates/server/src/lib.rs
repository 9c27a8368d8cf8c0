//! HTTP/JSON front end for attribute-feedback search sessions over a
//! described corpus, plus static serving of the web UI.

mod attributes;
mod error;
mod state;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use texelatt_core::search::FeedbackConstraint;
use tower_http::services::ServeDir;

pub use attributes::{attribute_info, AttributeInfo, INTERPRETATIONS};
pub use error::ApiError;
pub use state::{AppState, CreatedSession, FeedbackOutcome, ServerConfig, SessionView, Slot};

pub const PORT_ENV: &str = "TEXELATT_PORT";
pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    #[serde(default = "random_target")]
    pub target: String,
}

fn random_target() -> String {
    "random".into()
}

#[derive(Debug, Deserialize)]
pub struct FeedbackRequest {
    pub constraints: Vec<FeedbackConstraint>,
}

async fn create_session(State(state): State<Arc<AppState>>, Json(req): Json<CreateRequest>) -> Result<Json<CreatedSession>, ApiError> {
    state.create_session(&req.target).map(Json)
}

async fn feedback(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<FeedbackRequest>,
) -> Result<Json<FeedbackOutcome>, ApiError> {
    state.feedback(&id, req.constraints).map(Json)
}

async fn session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    state.session_view(&id).map(Json)
}

async fn image(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let bytes = state.image(&id)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes))
}

async fn attributes() -> Json<Vec<AttributeInfo>> {
    Json(attribute_info())
}

pub fn router(state: Arc<AppState>) -> Router {
    let static_dir = state.config().static_dir.clone();
    let api = Router::new()
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(session))
        .route("/api/session/{id}/feedback", post(feedback))
        .route("/api/image/{id}", get(image))
        .route("/api/attributes", get(attributes))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Port from [`PORT_ENV`], falling back to [`DEFAULT_PORT`].
pub fn port_from_env() -> u16 {
    std::env::var(PORT_ENV).ok().and_then(|p| p.parse().ok()).unwrap_or(DEFAULT_PORT)
}

/// Serves until Ctrl-C.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
