//! HTTP service. Handlers only decode requests, call the library and encode
//! the result; the dataset is an immutable snapshot shared by all requests.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use trajsketch::ingest::{stroke_to_spec, IngestError, StrokeInput, StrokeParams, WaypointPlan};
use trajsketch::interaction::detect_key_steps;
use trajsketch::similarity::{merge_ranked, top_k_similar, SimilarityError, SimilarityResult, WaypointSeq};
use trajsketch::simulator::{densify, execute, roundtrip_error, SimConfig, SimError};
use trajsketch::sketch::{rasterize, SketchError};
use trajsketch::{CameraModel, EpisodeTrajectory, InteractionEvent, SketchMode, SketchSpec};

use crate::config::WorkspaceConfig;
use crate::dataset::{DatasetSnapshot, Scene};

pub const NDJSON: &str = "application/x-ndjson";
/// Dataset entries scanned between two progress lines of a streamed query.
const STREAM_CHUNK: usize = 2048;

#[derive(Clone)]
pub struct AppState {
    pub config: Arc<WorkspaceConfig>,
    pub dataset: Arc<DatasetSnapshot>,
    pub scenes: Arc<BTreeMap<String, Scene>>,
}

impl AppState {
    pub fn new(config: WorkspaceConfig, dataset: DatasetSnapshot, scenes: BTreeMap<String, Scene>) -> Self {
        Self { config: Arc::new(config), dataset: Arc::new(dataset), scenes: Arc::new(scenes) }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/scene/{id}", get(scene))
        .route("/sketch/rasterize", post(sketch_rasterize))
        .route("/similarity/query", post(similarity_query))
        .route("/rollout", post(rollout))
        .route("/dataset/stats", get(dataset_stats))
        .with_state(state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub error: ErrorBody,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl ToString) -> Self {
        Self { status, code, message: message.to_string() }
    }

    pub fn bad_request(m: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", m)
    }

    pub fn schema(m: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "schema_error", m)
    }

    pub fn not_found(m: impl ToString) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", m)
    }

    fn behind_camera(m: impl ToString) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "behind_camera", m)
    }

    fn internal(m: impl ToString) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", m)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorEnvelope { error: ErrorBody { code: self.code.to_string(), message: self.message } };
        (self.status, Json(body)).into_response()
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        use trajsketch::geometry::GeometryError;
        match e {
            IngestError::BehindCamera(_) | IngestError::Geometry(GeometryError::BehindCamera { .. }) => {
                Self::behind_camera(e)
            }
            IngestError::Json(_) | IngestError::Schema { .. } => Self::schema(e),
            _ => Self::bad_request(e),
        }
    }
}

impl From<SimilarityError> for ApiError {
    fn from(e: SimilarityError) -> Self {
        Self::bad_request(e)
    }
}

impl From<SketchError> for ApiError {
    fn from(e: SketchError) -> Self {
        match e {
            SketchError::PngEncode(_) => Self::internal(e),
            _ => Self::bad_request(e),
        }
    }
}

impl From<SimError> for ApiError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Unreachable { .. } | SimError::LimitViolation { .. } => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "unreachable", e)
            }
            _ => Self::bad_request(e),
        }
    }
}

/// Decode a JSON body; any syntax or shape error is a `schema_error`.
fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(ApiError::schema)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)
}

fn b64(bytes: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneResponse {
    pub scene_id: String,
    pub camera: CameraModel,
    pub image_png_base64: String,
}

async fn scene(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<SceneResponse>, ApiError> {
    let s = st.scenes.get(&id).ok_or_else(|| ApiError::not_found(format!("no scene {id}")))?;
    Ok(Json(SceneResponse { scene_id: s.scene_id.clone(), camera: s.camera.clone(), image_png_base64: b64(&s.image_png) }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterizeRequest {
    #[serde(flatten)]
    pub stroke: StrokeInput,
    #[serde(default)]
    pub resample_m: Option<usize>,
    /// Overrides the mode implied by the presence of height annotations.
    #[serde(default)]
    pub mode: Option<SketchMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterizeResponse {
    pub png_base64: String,
    pub width: u32,
    pub height: u32,
    pub events: Vec<InteractionEvent>,
    pub spec: SketchSpec,
}

/// The library pipeline behind `POST /sketch/rasterize`.
pub fn rasterize_stroke(req: &RasterizeRequest, cfg: &WorkspaceConfig) -> Result<RasterizeResponse, ApiError> {
    let params = StrokeParams {
        resample_m: req.resample_m.unwrap_or(cfg.resample_m),
        heights: cfg.heights().map_err(ApiError::internal)?,
    };
    let mut spec = stroke_to_spec(&req.stroke, &params)?;
    if let Some(mode) = req.mode {
        spec = spec.with_mode(mode);
    }
    let img = rasterize(&spec, &cfg.render)?;
    Ok(RasterizeResponse {
        png_base64: b64(&img.to_png()?),
        width: img.width(),
        height: img.height(),
        events: spec.events.clone(),
        spec,
    })
}

async fn sketch_rasterize(State(st): State<AppState>, body: Bytes) -> Result<Json<RasterizeResponse>, ApiError> {
    let req: RasterizeRequest = parse(&body)?;
    let cfg = st.config.clone();
    Ok(Json(blocking(move || rasterize_stroke(&req, &cfg)).await??))
}

fn default_k() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    #[serde(default)]
    pub waypoints: Option<WaypointSeq>,
    #[serde(default)]
    pub episode_id: Option<String>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub resample_n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub results: Vec<SimilarityResult>,
}

/// One line of a streamed query response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryEvent {
    Progress { scanned: usize, total: usize },
    Done(QueryResponse),
    Error(ErrorBody),
}

/// Resolve the query sequence and effective resampling of a request.
pub fn resolve_query(
    req: &QueryRequest,
    dataset: &DatasetSnapshot,
    cfg: &WorkspaceConfig,
) -> Result<(WaypointSeq, Option<usize>), ApiError> {
    let query = match (&req.waypoints, &req.episode_id) {
        (Some(w), None) => w.clone(),
        (None, Some(id)) => dataset
            .record(id)
            .map(|r| r.waypoints.clone())
            .ok_or_else(|| ApiError::not_found(format!("no episode {id} in the dataset")))?,
        _ => return Err(ApiError::bad_request("give exactly one of waypoints and episode_id")),
    };
    if req.k == 0 {
        return Err(SimilarityError::ZeroK.into());
    }
    Ok((query, req.resample_n.or(cfg.resample_n)))
}

async fn similarity_query(State(st): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: QueryRequest = parse(&body)?;
    let (query, resample_n) = resolve_query(&req, &st.dataset, &st.config)?;
    let k = req.k;
    let total = st.dataset.records.len();
    if total <= st.config.stream_threshold {
        let data = st.dataset.clone();
        let results = blocking(move || top_k_similar(&query, &data.records, k, resample_n)).await??;
        return Ok(Json(QueryResponse { results }).into_response());
    }

    // Large dataset: scan in chunks, emitting a progress line after each.
    let (tx, rx) = tokio::sync::mpsc::channel::<QueryEvent>(16);
    let data = st.dataset.clone();
    tokio::task::spawn_blocking(move || {
        let mut best = Vec::new();
        for (i, chunk) in data.records.chunks(STREAM_CHUNK).enumerate() {
            match top_k_similar(&query, chunk, k, resample_n) {
                Ok(part) => {
                    best.extend(part);
                    best = merge_ranked(best, k);
                }
                Err(e) => {
                    let _ = tx.blocking_send(QueryEvent::Error(ErrorBody { code: "bad_request".into(), message: e.to_string() }));
                    return;
                }
            }
            let scanned = (i * STREAM_CHUNK + chunk.len()).min(total);
            if tx.blocking_send(QueryEvent::Progress { scanned, total }).is_err() {
                return; // client went away
            }
        }
        let _ = tx.blocking_send(QueryEvent::Done(QueryResponse { results: best }));
    });
    let lines = futures::stream::unfold(rx, |mut rx| async move {
        let ev = rx.recv().await?;
        let mut line = serde_json::to_vec(&ev).expect("serializable");
        line.push(b'\n');
        Some((Ok::<_, std::convert::Infallible>(Bytes::from(line)), rx))
    });
    Ok(([(header::CONTENT_TYPE, NDJSON)], Body::from_stream(lines)).into_response())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutRequest {
    pub plan: WaypointPlan,
    #[serde(default)]
    pub sim: Option<SimConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutResponse {
    pub episode: EpisodeTrajectory,
    pub events: Vec<InteractionEvent>,
    /// Fréchet distance between the densified commanded path and the
    /// executed positions, meters.
    pub roundtrip_error: f64,
}

/// The library pipeline behind `POST /rollout`.
pub fn run_rollout(req: &RolloutRequest, cfg: &WorkspaceConfig) -> Result<RolloutResponse, ApiError> {
    let sim = req.sim.clone().unwrap_or_default();
    let episode = execute(&req.plan, &sim)?;
    let commanded = densify(&req.plan.positions(), sim.step_length());
    let roundtrip_error = roundtrip_error(&commanded, &episode)?;
    // a single-sample rollout has no transitions to detect
    let events = if episode.len() < 2 { Vec::new() } else { detect_key_steps(&episode, cfg.epsilon).map_err(ApiError::internal)? };
    Ok(RolloutResponse { episode, events, roundtrip_error })
}

async fn rollout(State(st): State<AppState>, body: Bytes) -> Result<Json<RolloutResponse>, ApiError> {
    let req: RolloutRequest = parse(&body)?;
    let cfg = st.config.clone();
    Ok(Json(blocking(move || run_rollout(&req, &cfg)).await??))
}

async fn dataset_stats(State(st): State<AppState>) -> Json<crate::dataset::DatasetStats> {
    Json(st.dataset.stats.clone())
}
