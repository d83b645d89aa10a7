//! JSON HTTP API over a [`Service`]. Handlers only read stored artifacts
//! or queue jobs; nothing is computed on the request path.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::services::ServeDir;

use skimsum::model::{PipelineConfig, Transcript};

use crate::error::ServiceError;
use crate::input::{Input, MarkedRecording};
use crate::service::Service;

const PLACEHOLDER: &str = "<!doctype html><title>skimsum</title>\
<p>No UI bundle configured. The API is under <code>/api/</code>.</p>";

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::InvalidConfig(_) | ServiceError::UnreadableInput(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) | ServiceError::JobNotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::NotReady { .. } => StatusCode::CONFLICT,
            ServiceError::RangeOutOfBounds(_) => StatusCode::RANGE_NOT_SATISFIABLE,
            ServiceError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self.body())).into_response()
    }
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

type Shared = State<Arc<Service>>;

/// `ui_dir` is served at `/` when given.
pub fn router(service: Arc<Service>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/recordings", get(list_recordings))
        .route("/api/recordings/{id}/hierarchy", get(hierarchy))
        .route("/api/recordings/{id}/transcript", get(transcript))
        .route("/api/recordings/{id}/audio", get(audio))
        .route("/api/jobs", post(submit_job))
        .route("/api/jobs/{id}", get(job))
        .with_state(service);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

async fn list_recordings(State(s): Shared) -> Response {
    Json(s.list_recordings()).into_response()
}

async fn hierarchy(State(s): Shared, Path(id): Path<String>) -> Result<Response, ServiceError> {
    s.get_hierarchy(&id).map(json_bytes)
}

async fn transcript(State(s): Shared, Path(id): Path<String>) -> Result<Response, ServiceError> {
    s.get_transcript(&id).map(json_bytes)
}

#[derive(Debug, Deserialize)]
struct AudioQuery {
    start_s: Option<f64>,
    end_s: Option<f64>,
}

async fn audio(
    State(s): Shared,
    Path(id): Path<String>,
    Query(q): Query<AudioQuery>,
) -> Result<Response, ServiceError> {
    let slice = s.get_audio_slice(&id, q.start_s, q.end_s)?;
    Ok(Response::builder()
        .header(header::CONTENT_TYPE, slice.content_type)
        .header("X-Slice-Start", slice.start_s.to_string())
        .header("X-Slice-End", slice.end_s.to_string())
        .body(Body::from(slice.bytes))
        .expect("valid response"))
}

/// Exactly one of the input fields must be set.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobRequest {
    transcript: Option<serde_json::Value>,
    marked: Option<MarkedRecording>,
    audio_path: Option<PathBuf>,
    recording_id: Option<String>,
    config: Option<serde_json::Value>,
}

async fn submit_job(State(s): Shared, body: axum::body::Bytes) -> Result<Response, ServiceError> {
    let req: JobRequest =
        serde_json::from_slice(&body).map_err(|e| ServiceError::UnreadableInput(e.to_string()))?;
    let config = req
        .config
        .map(|v| PipelineConfig::from_json(&v.to_string()))
        .transpose()?;
    let input = match (req.transcript, req.marked, req.audio_path, req.recording_id) {
        (Some(t), None, None, None) => Input::Transcript(
            serde_json::from_value::<Transcript>(t)
                .map_err(|e| ServiceError::UnreadableInput(format!("transcript: {e}")))?,
        ),
        (None, Some(m), None, None) => Input::Marked(m),
        (None, None, Some(p), None) => Input::Audio(p),
        (None, None, None, Some(id)) => Input::Recording(id),
        _ => {
            return Err(ServiceError::UnreadableInput(
                "set exactly one of transcript, marked, audio_path, recording_id".to_string(),
            ))
        }
    };
    let service = Arc::clone(&s);
    let job = tokio::task::spawn_blocking(move || service.submit_job(input, config))
        .await
        .expect("submit task")?;
    Ok((StatusCode::ACCEPTED, Json(job)).into_response())
}

async fn job(State(s): Shared, Path(id): Path<String>) -> Result<Response, ServiceError> {
    s.get_job(&id).map(|j| Json(j).into_response())
}
