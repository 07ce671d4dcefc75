//! Thin async client for the sightline HTTP service.

use futures::{Stream, StreamExt, TryStreamExt};
use reqwest::{Method, Response, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sightline_core::api::{
    ApiError, CreateSessionRequest, CreateSessionResponse, InferRequest, MetricsRequest, PlanRequest,
    PlanResponse, SimulateRequest, SimulateResponse, ValidateRequest, ValidateResponse,
};
use sightline_core::session::{SessionLog, SessionState};
use sightline_core::{Distribution, MetricResult, WireMessage};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server returned {status}: {} ({})", .error.message, .error.code)]
    Api { status: StatusCode, error: ApiError },
    #[error("could not decode response: {0}")]
    Decode(String),
}

impl ClientError {
    /// The server's error code, when the server produced one.
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Api { error, .. } => Some(&error.code),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:7878`.
    pub fn new(base: impl Into<String>) -> Self {
        Client {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    async fn check(resp: Response) -> Result<Response> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let bytes = resp.bytes().await?;
        let error = serde_json::from_slice(&bytes).unwrap_or_else(|_| ApiError {
            code: "http".into(),
            message: String::from_utf8_lossy(&bytes).into_owned(),
        });
        Err(ClientError::Api { status, error })
    }

    async fn decode<T: DeserializeOwned>(resp: Response) -> Result<T> {
        let bytes = Self::check(resp).await?.bytes().await?;
        serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode(e.to_string()))
    }

    async fn call<B: Serialize + ?Sized, T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        body: Option<&B>,
    ) -> Result<T> {
        let mut req = self.http.request(method, self.url(path));
        if let Some(b) = body {
            let json = serde_json::to_vec(b).map_err(|e| ClientError::Decode(e.to_string()))?;
            req = req.header("content-type", "application/json").body(json);
        }
        Self::decode(req.send().await?).await
    }

    async fn post<B: Serialize + ?Sized, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        self.call(Method::POST, path, Some(body)).await
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        self.call::<(), T>(Method::GET, path, None).await
    }

    pub async fn health(&self) -> Result<serde_json::Value> {
        self.get("/health").await
    }

    pub async fn validate(&self, req: &ValidateRequest) -> Result<ValidateResponse> {
        self.post("/v1/validate", req).await
    }

    pub async fn infer(&self, req: &InferRequest) -> Result<Distribution> {
        self.post("/v1/infer", req).await
    }

    pub async fn metrics(&self, req: &MetricsRequest) -> Result<MetricResult> {
        self.post("/v1/metrics", req).await
    }

    pub async fn plan(&self, req: &PlanRequest) -> Result<PlanResponse> {
        self.post("/v1/plan", req).await
    }

    pub async fn simulate(&self, req: &SimulateRequest) -> Result<SimulateResponse> {
        self.post("/v1/simulate", req).await
    }

    pub async fn create_session(&self, req: &CreateSessionRequest) -> Result<CreateSessionResponse> {
        self.post("/v1/sessions", req).await
    }

    pub async fn sessions(&self) -> Result<Vec<SessionState>> {
        self.get("/v1/sessions").await
    }

    pub async fn state(&self, session: &str) -> Result<SessionState> {
        self.get(&format!("/v1/sessions/{session}")).await
    }

    /// Sends one wire message and returns the session's reply.
    pub async fn send(&self, session: &str, msg: &WireMessage) -> Result<WireMessage> {
        self.post(&format!("/v1/sessions/{session}/messages"), msg).await
    }

    pub async fn delete_session(&self, session: &str) -> Result<()> {
        let resp = self
            .http
            .delete(self.url(&format!("/v1/sessions/{session}")))
            .send()
            .await?;
        Self::check(resp).await.map(drop)
    }

    pub async fn log(&self, session: &str) -> Result<SessionLog> {
        let resp = self
            .http
            .get(self.url(&format!("/v1/sessions/{session}/log")))
            .send()
            .await?;
        let text = Self::check(resp).await?.text().await?;
        SessionLog::from_jsonl(&text).map_err(|e| ClientError::Decode(e.to_string()))
    }

    /// Observes a session: the hello, then every message it sends, ending
    /// after the end message.
    pub async fn stream(&self, session: &str) -> Result<impl Stream<Item = Result<WireMessage>> + Unpin> {
        let resp = self
            .http
            .get(self.url(&format!("/v1/sessions/{session}/stream")))
            .send()
            .await?;
        let bytes = Self::check(resp).await?.bytes_stream().map_err(ClientError::from);
        Ok(Box::pin(ndjson_lines(bytes)))
    }
}

/// Splits a byte stream into newline-delimited wire messages.
fn ndjson_lines<S, B>(bytes: S) -> impl Stream<Item = Result<WireMessage>>
where
    S: Stream<Item = Result<B>> + Unpin,
    B: AsRef<[u8]>,
{
    futures::stream::unfold((bytes, Vec::<u8>::new(), false), |(mut bytes, mut buf, mut eof)| async move {
        loop {
            if let Some(pos) = buf.iter().position(|&b| b == b'\n') {
                let line: Vec<u8> = buf.drain(..=pos).collect();
                let text = String::from_utf8_lossy(&line);
                if text.trim().is_empty() {
                    continue;
                }
                let msg = WireMessage::from_line(text.trim()).map_err(|e| ClientError::Decode(e.to_string()));
                return Some((msg, (bytes, buf, eof)));
            }
            if eof {
                if buf.iter().all(u8::is_ascii_whitespace) {
                    return None;
                }
                let text = String::from_utf8_lossy(&buf).into_owned();
                buf.clear();
                let msg = WireMessage::from_line(text.trim()).map_err(|e| ClientError::Decode(e.to_string()));
                return Some((msg, (bytes, buf, eof)));
            }
            match bytes.next().await {
                Some(Ok(chunk)) => buf.extend_from_slice(chunk.as_ref()),
                Some(Err(e)) => return Some((Err(e), (bytes, buf, true))),
                None => eof = true,
            }
        }
    })
}
