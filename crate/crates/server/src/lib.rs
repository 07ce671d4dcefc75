//! HTTP/JSON service over the engine: batch endpoints for every operation
//! plus live sessions reachable by request/response, an NDJSON observer
//! stream, or a WebSocket.

mod actor;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::{Body, Bytes};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sightline_core::api::{self, ApiError, CreateSessionRequest, CreateSessionResponse, Pacing};
use sightline_core::session::{Session, SessionState};
use sightline_core::{Error, PolicyConfig, PolicyKind, Scenario, WireMessage};
use tokio::net::TcpListener;
use tokio::sync::broadcast;

pub use actor::SessionHandle;

/// Defaults applied to session requests that leave fields out.
#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub scenario: Option<Scenario>,
    pub policy: PolicyConfig,
    pub pacing: Pacing,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            scenario: None,
            policy: PolicyConfig::new(PolicyKind::Managed),
            pacing: Pacing::Timer { interval_ms: 1000 },
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServerConfig>,
    sessions: Arc<RwLock<BTreeMap<String, SessionHandle>>>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        AppState {
            config: Arc::new(config),
            sessions: Arc::default(),
        }
    }

    fn session(&self, id: &str) -> Result<SessionHandle, ApiFailure> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiFailure::not_found(id))
    }
}

/// An error response: status plus [`ApiError`] body.
#[derive(Debug)]
pub struct ApiFailure {
    status: StatusCode,
    body: ApiError,
}

impl ApiFailure {
    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        ApiFailure {
            status: StatusCode::BAD_REQUEST,
            body: ApiError {
                code: code.into(),
                message: message.into(),
            },
        }
    }

    fn not_found(id: &str) -> Self {
        ApiFailure {
            status: StatusCode::NOT_FOUND,
            body: ApiError {
                code: "unknown_session".into(),
                message: format!("no session `{id}`"),
            },
        }
    }

    fn gone(id: &str) -> Self {
        ApiFailure {
            status: StatusCode::GONE,
            body: ApiError {
                code: "session_stopped".into(),
                message: format!("session `{id}` has stopped"),
            },
        }
    }
}

impl From<Error> for ApiFailure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse { .. } => StatusCode::BAD_REQUEST,
            Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiFailure {
            status,
            body: ApiError::from(&e),
        }
    }
}

impl IntoResponse for ApiFailure {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiFailure>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiFailure> {
    serde_json::from_slice(body).map_err(|e| ApiFailure::bad_request("parse", e.to_string()))
}

/// Parses the body and runs a CPU-bound handler off the async workers.
async fn compute<Req, Resp>(
    body: Bytes,
    f: impl FnOnce(&Req) -> sightline_core::Result<Resp> + Send + 'static,
) -> ApiResult<Resp>
where
    Req: DeserializeOwned + Send + 'static,
    Resp: Serialize + Send + 'static,
{
    let req: Req = parse(&body)?;
    let out = tokio::task::spawn_blocking(move || f(&req))
        .await
        .map_err(|e| ApiFailure {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: ApiError {
                code: "internal".into(),
                message: e.to_string(),
            },
        })??;
    Ok(Json(out))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/validate", post(|b: Bytes| compute(b, api::validate)))
        .route("/v1/infer", post(|b: Bytes| compute(b, api::infer)))
        .route("/v1/metrics", post(|b: Bytes| compute(b, api::metrics)))
        .route("/v1/plan", post(|b: Bytes| compute(b, api::plan)))
        .route("/v1/simulate", post(|b: Bytes| compute(b, api::simulate)))
        .route("/v1/sessions", post(create_session).get(list_sessions))
        .route("/v1/sessions/{id}", get(session_state).delete(delete_session))
        .route("/v1/sessions/{id}/messages", post(session_message))
        .route("/v1/sessions/{id}/stream", get(session_stream))
        .route("/v1/sessions/{id}/ws", get(session_ws))
        .route("/v1/sessions/{id}/log", get(session_log))
        .with_state(state)
}

/// Binds and serves until the process stops.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve_on(listener, config).await
}

pub async fn serve_on(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::new(config))).await
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<CreateSessionResponse> {
    let req: CreateSessionRequest = if body.iter().all(u8::is_ascii_whitespace) {
        CreateSessionRequest::default()
    } else {
        parse(&body)?
    };
    let scenario = req
        .scenario
        .or_else(|| state.config.scenario.clone())
        .ok_or_else(|| ApiFailure::bad_request("no_scenario", "no scenario given and the server has no default"))?;
    let policy = req.policy.unwrap_or(state.config.policy);
    let pacing = req.pacing.unwrap_or(state.config.pacing);
    let id = uuid::Uuid::new_v4().to_string();
    let (session, hello) = tokio::task::spawn_blocking({
        let id = id.clone();
        move || Session::start(id, scenario, policy)
    })
    .await
    .expect("session start does not panic")?;
    let handle = SessionHandle::spawn(session, hello.clone(), pacing);
    state
        .sessions
        .write()
        .expect("session map lock")
        .insert(id.clone(), handle);
    tracing::info!(session = %id, %policy, "session created");
    Ok(Json(CreateSessionResponse { session: id, hello }))
}

async fn list_sessions(State(state): State<AppState>) -> Json<Vec<SessionState>> {
    let handles: Vec<SessionHandle> = state.sessions.read().expect("session map lock").values().cloned().collect();
    let mut out = Vec::with_capacity(handles.len());
    for h in handles {
        if let Some(s) = h.state().await {
            out.push(s);
        }
    }
    Json(out)
}

async fn session_state(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionState> {
    let handle = state.session(&id)?;
    handle.state().await.map(Json).ok_or_else(|| ApiFailure::gone(&id))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiFailure> {
    state
        .sessions
        .write()
        .expect("session map lock")
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or_else(|| ApiFailure::not_found(&id))
}

async fn session_message(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<WireMessage> {
    let handle = state.session(&id)?;
    let msg: WireMessage = parse(&body)?;
    handle.send(msg).await.map(Json).ok_or_else(|| ApiFailure::gone(&id))
}

async fn session_log(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiFailure> {
    let handle = state.session(&id)?;
    let log = handle.log().await.ok_or_else(|| ApiFailure::gone(&id))?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], log.to_jsonl()).into_response())
}

fn line(msg: &WireMessage) -> String {
    let mut s = msg.to_line();
    s.push('\n');
    s
}

/// Next broadcast message, skipping over any the receiver lagged behind on.
async fn next_event(rx: &mut broadcast::Receiver<WireMessage>) -> Option<WireMessage> {
    loop {
        match rx.recv().await {
            Ok(m) => return Some(m),
            Err(broadcast::error::RecvError::Lagged(n)) => {
                tracing::warn!(skipped = n, "observer lagged");
            }
            Err(broadcast::error::RecvError::Closed) => return None,
        }
    }
}

/// Read-only NDJSON feed: the hello, then every message the session sends,
/// closing after the end message.
async fn session_stream(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiFailure> {
    let handle = state.session(&id)?;
    let rx = handle.subscribe();
    let hello = futures::stream::once(futures::future::ready(line(handle.hello())));
    let events = futures::stream::unfold((rx, false), |(mut rx, ended)| async move {
        if ended {
            return None;
        }
        let msg = next_event(&mut rx).await?;
        let ended = matches!(msg, WireMessage::End { .. });
        Some((line(&msg), (rx, ended)))
    });
    let body = Body::from_stream(hello.chain(events).map(Ok::<_, std::convert::Infallible>));
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

async fn session_ws(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiFailure> {
    let handle = state.session(&id)?;
    Ok(ws.on_upgrade(move |socket| drive_ws(socket, handle)))
}

/// Bidirectional console channel: each text frame is one wire message.
/// Replies reach the console through the broadcast like every other
/// session output; malformed frames are answered on this socket only.
async fn drive_ws(socket: WebSocket, handle: SessionHandle) {
    let (mut sink, mut stream) = socket.split();
    let mut events = handle.subscribe();
    let (direct_tx, mut direct_rx) = tokio::sync::mpsc::channel::<WireMessage>(16);

    let writer = tokio::spawn({
        let hello = handle.hello().clone();
        async move {
            if sink.send(Message::text(hello.to_line())).await.is_err() {
                return;
            }
            loop {
                let msg = tokio::select! {
                    m = next_event(&mut events) => match m { Some(m) => m, None => break },
                    m = direct_rx.recv() => match m { Some(m) => m, None => break },
                };
                if sink.send(Message::text(msg.to_line())).await.is_err() {
                    break;
                }
            }
            let _ = sink.close().await;
        }
    });

    while let Some(Ok(frame)) = stream.next().await {
        let text = match frame {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        for l in text.lines().filter(|l| !l.trim().is_empty()) {
            match WireMessage::from_line(l) {
                Ok(msg) => {
                    if handle.send(msg).await.is_none() {
                        break;
                    }
                }
                Err(e) => {
                    let _ = direct_tx.send(WireMessage::nack(0, e.to_string())).await;
                }
            }
        }
    }
    drop(direct_tx);
    writer.abort();
}
