//! HTTP boundary: `/stream` (WebSocket) plus read-only JSON endpoints.
//!
//! | route                | body                                        |
//! |----------------------|---------------------------------------------|
//! | `GET /stream`        | upgrade; one [`WireMessage`] per text frame |
//! | `GET /sessions`      | session listing rows, oldest first          |
//! | `GET /sessions/{id}` | the full session log, or 404                |
//! | `GET /config`        | the latest config echo                      |
//! | `GET /devices`       | capture device names                        |
//!
//! Errors are `{"error": "..."}` with a matching status code.
//!
//! [`WireMessage`]: crate::wire::WireMessage

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use pitchgate::game::{GameError, SessionStore};
use serde_json::json;
use tower_http::services::ServeDir;
use tracing::{debug, warn};

use crate::engine::EngineClient;
use crate::hub::Hub;
use crate::input::list_devices;

#[derive(Debug, Clone)]
pub struct AppState {
    pub hub: Arc<Hub>,
    pub engine: EngineClient,
    pub store: SessionStore,
}

/// The service routes; static files from `assets` are served for any
/// other path.
pub fn router(state: AppState, assets: Option<PathBuf>) -> Router {
    let app = Router::new()
        .route("/stream", get(stream))
        .route("/sessions", get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/config", get(config))
        .route("/devices", get(devices))
        .with_state(state);
    match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        let status = match e {
            GameError::NotFound(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

async fn list_sessions(State(state): State<AppState>) -> Result<Response, ApiError> {
    let store = state.store.clone();
    let rows = tokio::task::spawn_blocking(move || store.list_info())
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(rows).into_response())
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let store = state.store.clone();
    let log = tokio::task::spawn_blocking(move || store.get(&id))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(log).into_response())
}

async fn config(State(state): State<AppState>) -> Response {
    Json(state.engine.current_config()).into_response()
}

async fn devices() -> Response {
    Json(list_devices()).into_response()
}

async fn stream(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, state))
}

async fn client(socket: WebSocket, state: AppState) {
    let sub = state.hub.subscribe();
    let (mut sink, mut incoming) = socket.split();
    let engine = state.engine.clone();
    let reader = tokio::spawn(async move {
        while let Some(msg) = incoming.next().await {
            match msg {
                Ok(Message::Text(text)) => engine.send_text(text.as_str()),
                Ok(Message::Close(_)) | Err(_) => break,
                Ok(_) => {}
            }
        }
    });
    while let Some(text) = sub.recv().await {
        if sink.send(Message::Text(text.as_ref().into())).await.is_err() {
            break;
        }
    }
    if let Some(reason) = sub.end_reason() {
        debug!(%reason, "stream ended");
        if reason.contains("behind") {
            warn!(dropped_snapshots = sub.dropped_snapshots(), "disconnected a lagging client");
        }
    }
    let _ = sink.send(Message::Close(None)).await;
    reader.abort();
}
