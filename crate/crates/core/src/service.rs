//! HTTP/JSON facade over an [`Engine`].
//!
//! | route            | purpose                                         |
//! |------------------|-------------------------------------------------|
//! | `POST /stories`  | ingest a JSON array of stories (200, or 207 with per-story errors) |
//! | `GET /overview`  | `q`, `horizon`, `max_themes`, `stories_per_theme`; `x-cache: hit\|miss` |
//! | `POST /feedback` | thumbs and comments on a theme                  |
//! | `GET /health`    | liveness                                        |
//! | `GET /stats`     | index, cache and feedback counters              |

use std::collections::HashMap;
use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::{json, Value};
use tokio::net::TcpListener;

use crate::clock::Clock;
use crate::domain::Story;
use crate::engine::{parse_horizon, Engine, FeedbackRecord, OverviewRequest};
use crate::Error;

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub clock: Arc<dyn Clock>,
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], body).into_response()
}

fn error_response(status: StatusCode, message: impl Into<String>) -> Response {
    json_response(status, json!({ "error": message.into() }).to_string())
}

fn internal(e: impl std::fmt::Display) -> Response {
    error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/stories", post(post_stories))
        .route("/overview", get(get_overview))
        .route("/feedback", post(post_feedback))
        .route("/health", get(health))
        .route("/stats", get(stats))
        .with_state(state)
}

async fn post_stories(State(state): State<AppState>, body: Bytes) -> Response {
    let stories: Vec<Value> = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, format!("expected a JSON array of stories: {e}")),
    };
    let engine = state.engine.clone();
    let outcome = tokio::task::spawn_blocking(move || {
        let mut accepted = 0usize;
        let mut rejected = Vec::new();
        for (index, value) in stories.into_iter().enumerate() {
            let result = serde_json::from_value::<Story>(value)
                .map_err(Error::from)
                .and_then(|story| engine.ingest(story).map(|_| ()));
            match result {
                Ok(()) => accepted += 1,
                Err(e) => rejected.push(json!({ "index": index, "error": e.to_string() })),
            }
        }
        if let Err(e) = engine.flush() {
            log::error!("journal flush failed: {e}");
        }
        (accepted, rejected)
    })
    .await;
    match outcome {
        Ok((accepted, rejected)) => {
            let status = if rejected.is_empty() { StatusCode::OK } else { StatusCode::MULTI_STATUS };
            json_response(status, json!({ "accepted": accepted, "rejected": rejected }).to_string())
        }
        Err(e) => internal(e),
    }
}

fn parse_count(params: &HashMap<String, String>, name: &str) -> Result<Option<usize>, String> {
    match params.get(name) {
        None => Ok(None),
        Some(raw) => match raw.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{name} must be a positive integer")),
        },
    }
}

async fn get_overview(State(state): State<AppState>, Query(params): Query<HashMap<String, String>>) -> Response {
    let Some(q) = params.get("q") else {
        return error_response(StatusCode::BAD_REQUEST, "missing query parameter q");
    };
    let horizon = match parse_horizon(params.get("horizon").map_or("1d", String::as_str)) {
        Ok(h) => h,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, e),
    };
    let mut request = OverviewRequest::new(q.clone(), horizon);
    match (parse_count(&params, "max_themes"), parse_count(&params, "stories_per_theme")) {
        (Ok(m), Ok(s)) => {
            request.max_themes = m;
            request.stories_per_theme = s;
        }
        (Err(e), _) | (_, Err(e)) => return error_response(StatusCode::BAD_REQUEST, e),
    }
    let engine = state.engine.clone();
    let now = state.clock.now();
    let outcome = tokio::task::spawn_blocking(move || {
        engine.overview(&request, now, true).map(|(overview, hit)| (overview.to_json(), hit))
    })
    .await;
    match outcome {
        Ok(Ok((body, hit))) => {
            let mut response = json_response(StatusCode::OK, body);
            let flag = HeaderValue::from_static(if hit { "hit" } else { "miss" });
            response.headers_mut().insert("x-cache", flag);
            response
        }
        Ok(Err(Error::Syntax(e))) => {
            json_response(StatusCode::BAD_REQUEST, json!({ "error": e.message, "offset": e.offset }).to_string())
        }
        Ok(Err(Error::Config(e))) => error_response(StatusCode::BAD_REQUEST, e),
        Ok(Err(e)) => internal(e),
        Err(e) => internal(e),
    }
}

async fn post_feedback(State(state): State<AppState>, body: Bytes) -> Response {
    let mut record: FeedbackRecord = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, format!("invalid feedback record: {e}")),
    };
    if let Err(e) = record.validate() {
        return error_response(StatusCode::BAD_REQUEST, e);
    }
    if record.received_at == 0 {
        record.received_at = state.clock.now();
    }
    match state.engine.record_feedback(&record).and_then(|_| state.engine.flush()) {
        Ok(()) => json_response(StatusCode::OK, json!({ "ok": true }).to_string()),
        Err(e) => internal(e),
    }
}

async fn health() -> Response {
    json_response(StatusCode::OK, json!({ "status": "ok" }).to_string())
}

async fn stats(State(state): State<AppState>) -> Response {
    match serde_json::to_string(&state.engine.stats()) {
        Ok(body) => json_response(StatusCode::OK, body),
        Err(e) => internal(e),
    }
}

/// Serves until `shutdown` resolves, refreshing popular and primed cache
/// keys every `cache.refresh_interval_seconds`, then flushes the journals.
pub async fn serve(
    state: AppState,
    listener: TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let interval = Duration::from_secs(state.engine.config().cache.refresh_interval_seconds as u64);
    let refresher = {
        let state = state.clone();
        tokio::spawn(async move {
            let mut ticks = tokio::time::interval(interval);
            ticks.tick().await;
            loop {
                ticks.tick().await;
                let (engine, now) = (state.engine.clone(), state.clock.now());
                match tokio::task::spawn_blocking(move || engine.refresh_tick(now)).await {
                    Ok(n) => log::info!("cache refresh recomposed {n} overviews"),
                    Err(e) => log::error!("cache refresh panicked: {e}"),
                }
            }
        })
    };
    let engine = state.engine.clone();
    let result = axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await;
    refresher.abort();
    if let Err(e) = engine.flush() {
        log::error!("journal flush failed: {e}");
    }
    result
}
