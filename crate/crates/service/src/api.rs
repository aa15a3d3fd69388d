use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chromascreen::adapt::{optimize_palette, AdaptError, OptimizeOptions, Palette};
use chromascreen::color::{simulate, CvdKind, CvdProfile, Srgb8};
use chromascreen::engine::{ClassKind, Classification, EngineError, SessionState};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::adaptation::SessionAdaptation;
use crate::store::{battery_for_seed, Progress, Store, StoreError};

pub const PLATE_ID: &str = "x-plate-id";
pub const PLATE_INDEX: &str = "x-plate-index";
pub const PLATE_TOTAL: &str = "x-plate-total";

#[derive(Clone)]
pub struct AppState {
    store: Arc<Mutex<Store>>,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        AppState {
            store: Arc::new(Mutex::new(store)),
        }
    }

    pub fn store(&self) -> std::sync::MutexGuard<'_, Store> {
        self.store.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::UnknownSession(_) => StatusCode::NOT_FOUND,
            StoreError::NotComplete(_) => StatusCode::CONFLICT,
            StoreError::Engine(EngineError::State(_) | EngineError::Sequencing { .. }) => StatusCode::CONFLICT,
            StoreError::Engine(EngineError::MalformedAnswer(_)) => StatusCode::BAD_REQUEST,
            StoreError::Engine(_) | StoreError::Log(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            message: e.to_string(),
        }
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid body: {e}")))
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Created {
    pub session_id: String,
    pub plate_count: usize,
    pub first_plate_id: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerBody {
    answer: String,
    #[serde(default)]
    plate_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Progressed {
    pub done: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_plate_id: Option<String>,
    pub result_ready: bool,
}

/// A plate outcome as shown to the test-taker: whether the reading was right,
/// but not what the right reading was.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PublicOutcome {
    pub plate_id: String,
    pub given: String,
    pub correct: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PublicClassification {
    pub kind: ClassKind,
    pub severity: f64,
    pub confidence: f64,
    pub per_plate: Vec<PublicOutcome>,
}

impl From<&Classification> for PublicClassification {
    fn from(c: &Classification) -> Self {
        PublicClassification {
            kind: c.kind,
            severity: c.severity,
            confidence: c.confidence,
            per_plate: c
                .per_plate
                .iter()
                .map(|o| PublicOutcome {
                    plate_id: o.plate_id.clone(),
                    given: o.given.clone(),
                    correct: o.correct,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SessionResult {
    pub session_id: String,
    pub classification: PublicClassification,
    pub adaptation: SessionAdaptation,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Status {
    pub state: SessionState,
    pub answered: usize,
    pub plate_count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdaptBody {
    palette: Palette,
    profile: CvdProfile,
    #[serde(default)]
    options: Option<OptimizeOptions>,
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create_session(State(state): State<AppState>) -> Result<(StatusCode, Json<Created>), ApiError> {
    let seed = state.store().next_seed();
    let battery = tokio::task::spawn_blocking(move || battery_for_seed(seed))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(format!("battery generation failed: {e}")))?;
    let first_plate_id = battery.plates[0].id.clone();
    let plate_count = battery.plates.len();
    let session_id = state.store().create_session(seed, battery)?;
    Ok((
        StatusCode::CREATED,
        Json(Created {
            session_id,
            plate_count,
            first_plate_id,
        }),
    ))
}

async fn session_status(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Status>, ApiError> {
    let (state, answered, plate_count) = state.store().state(&id)?;
    Ok(Json(Status {
        state,
        answered,
        plate_count,
    }))
}

async fn plate(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let view = state.store().current_plate(&id)?;
    let header_value = |v: String| HeaderValue::from_str(&v).map_err(|e| ApiError::internal(e.to_string()));
    let headers = [
        (header::CONTENT_TYPE, HeaderValue::from_static("image/svg+xml")),
        (header::CACHE_CONTROL, HeaderValue::from_static("no-store")),
        (HeaderName::from_static(PLATE_ID), header_value(view.plate_id)?),
        (HeaderName::from_static(PLATE_INDEX), header_value(view.index.to_string())?),
        (HeaderName::from_static(PLATE_TOTAL), header_value(view.total.to_string())?),
    ];
    Ok((headers, view.svg).into_response())
}

async fn respond(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Progressed>, ApiError> {
    let mut store = state.store();
    // unknown session and wrong state take precedence over body problems
    let (session_state, _, _) = store.state(&id)?;
    if session_state != SessionState::InProgress {
        return Err(StoreError::Engine(EngineError::State(session_state)).into());
    }
    let body: AnswerBody = parse_body(&body)?;
    let progress = store.respond(&id, body.plate_id.as_deref(), &body.answer)?;
    Ok(Json(match progress {
        Progress::Next(next) => Progressed {
            done: false,
            next_plate_id: Some(next),
            result_ready: false,
        },
        Progress::Done => Progressed {
            done: true,
            next_plate_id: None,
            result_ready: true,
        },
    }))
}

async fn result(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionResult>, ApiError> {
    let (classification, adaptation) = state.store().result(&id)?;
    Ok(Json(SessionResult {
        session_id: id,
        classification: (&classification).into(),
        adaptation,
    }))
}

async fn adapt(body: Bytes) -> Result<Response, ApiError> {
    let body: AdaptBody = parse_body(&body)?;
    let opts = body.options.unwrap_or_default();
    let result = tokio::task::spawn_blocking(move || optimize_palette(&body.palette, body.profile, &opts))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let result = result.map_err(|e: AdaptError| ApiError::bad_request(e.to_string()))?;
    Ok(Json(result).into_response())
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Simulated {
    pub hex: String,
}

async fn simulate_color(Query(query): Query<HashMap<String, String>>) -> Result<Json<Simulated>, ApiError> {
    let field = |name: &str| {
        query
            .get(name)
            .ok_or_else(|| ApiError::bad_request(format!("missing query parameter {name}")))
    };
    let hex = field("hex")?;
    let color = Srgb8::from_hex(hex.strip_prefix('#').unwrap_or(hex))
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let kind: CvdKind = field("kind")?.parse().map_err(|e: chromascreen::color::ColorError| ApiError::bad_request(e.to_string()))?;
    let severity: f64 = field("severity")?
        .parse()
        .map_err(|_| ApiError::bad_request("severity must be a number"))?;
    let profile = CvdProfile::new(kind, severity).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let out = simulate(color.to_linear(), profile).to_srgb8();
    Ok(Json(Simulated {
        hex: out.to_hex().trim_start_matches('#').to_string(),
    }))
}

/// CORS for the given origins; any origin when the list is empty.
pub fn cors(origins: &[String]) -> CorsLayer {
    let exposed = [PLATE_ID, PLATE_INDEX, PLATE_TOTAL].map(HeaderName::from_static);
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any).expose_headers(exposed);
    if origins.is_empty() {
        layer.allow_origin(Any)
    } else {
        let list: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
        layer.allow_origin(AllowOrigin::list(list))
    }
}

pub fn router(state: AppState, origins: &[String]) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(session_status))
        .route("/api/sessions/{id}/plate", get(plate))
        .route("/api/sessions/{id}/response", post(respond))
        .route("/api/sessions/{id}/result", get(result))
        .route("/api/adapt", post(adapt))
        .route("/api/simulate", get(simulate_color))
        .layer(cors(origins))
        .with_state(state)
}
