//! Local HTTP+JSON view of one simulation session.
//!
//! Reads share the session; mutations take it exclusively and fail with 409
//! rather than queue when another one is in flight.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use proactive_core::sim::trace_to_jsonl;
use proactive_core::{Pick, RunMode, Scenario, Session, SimError};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::RwLock;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub struct AppState {
    pub scenario: Arc<Scenario>,
    pub session: RwLock<Session>,
}

impl AppState {
    pub fn new(scenario: Arc<Scenario>, mode: RunMode, seed: u64) -> Result<Arc<Self>, SimError> {
        let start = scenario.config.start.clone();
        let session = Session::start(scenario.clone(), mode, seed, &start)?;
        Ok(Arc::new(AppState {
            scenario,
            session: RwLock::new(session),
        }))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRequest {
    pub pick: Pick,
    #[serde(default)]
    pub outcome: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRequest {
    pub mode: RunMode,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ResetRequest {
    #[serde(default)]
    pub seed: Option<u64>,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(json!({ "error": msg.into() }))).into_response()
}

fn sim_error(e: SimError) -> Response {
    error(StatusCode::BAD_REQUEST, e.to_string())
}

fn busy() -> Response {
    error(StatusCode::CONFLICT, "session is busy with another change")
}

async fn graph(State(st): State<Arc<AppState>>) -> Response {
    Json(st.scenario.world.graph_view()).into_response()
}

async fn session(State(st): State<Arc<AppState>>) -> Response {
    Json(st.session.read().await.info()).into_response()
}

async fn opportunities(State(st): State<Arc<AppState>>) -> Response {
    Json(st.session.read().await.opportunities()).into_response()
}

async fn trace(State(st): State<Arc<AppState>>) -> Response {
    let body = trace_to_jsonl(st.session.read().await.trace());
    ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
}

async fn step(State(st): State<Arc<AppState>>, Json(req): Json<StepRequest>) -> Response {
    let Ok(mut s) = st.session.try_write() else {
        return busy();
    };
    match s.step(&req.pick, req.outcome) {
        Ok(e) => Json(e.clone()).into_response(),
        Err(e) => sim_error(e),
    }
}

async fn mode(State(st): State<Arc<AppState>>, Json(req): Json<ModeRequest>) -> Response {
    let Ok(mut s) = st.session.try_write() else {
        return busy();
    };
    Json(s.set_mode(req.mode).clone()).into_response()
}

async fn reset(State(st): State<Arc<AppState>>, body: Option<Json<ResetRequest>>) -> Response {
    let Ok(mut s) = st.session.try_write() else {
        return busy();
    };
    let seed = body.and_then(|Json(r)| r.seed).unwrap_or(st.scenario.config.seed);
    match s.reset(seed) {
        Ok(e) => Json(e.clone()).into_response(),
        Err(e) => sim_error(e),
    }
}

async fn not_found() -> Response {
    error(StatusCode::NOT_FOUND, "no such endpoint")
}

fn local_origin(origin: &HeaderValue) -> bool {
    let Ok(o) = origin.to_str() else {
        return false;
    };
    let host = o.split_once("://").map_or(o, |(_, rest)| rest);
    let host = host.rsplit_once(':').map_or(host, |(h, port)| {
        if port.chars().all(|c| c.is_ascii_digit()) {
            h
        } else {
            host
        }
    });
    matches!(host, "localhost" | "127.0.0.1" | "[::1]")
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|o, _| local_origin(o)))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/v1/graph", get(graph))
        .route("/v1/session", get(session))
        .route("/v1/opportunities", get(opportunities))
        .route("/v1/trace", get(trace))
        .route("/v1/step", post(step))
        .route("/v1/mode", post(mode))
        .route("/v1/reset", post(reset))
        .fallback(not_found)
        .layer(cors)
        .with_state(state)
}

pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("bridge listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origins() {
        for ok in ["http://localhost:5173", "http://127.0.0.1", "https://localhost"] {
            assert!(local_origin(&HeaderValue::from_static(ok)), "{ok}");
        }
        for bad in ["http://example.com", "http://localhost.evil.com:80", "null"] {
            assert!(!local_origin(&HeaderValue::from_static(bad)), "{bad}");
        }
    }
}
