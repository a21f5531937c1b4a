//! HTTP API backing the annotation client. Propagation jobs run one at a
//! time on a worker thread in submission order; segmentation previews wait
//! while a job is running.

use std::path::PathBuf;
use std::sync::mpsc;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::{error, info};
use objremove_core::image_io::encode_rgb_png;
use objremove_core::manifest::ViewSet;
use objremove_core::mask::RleMask;
use objremove_core::oracles::{CheckedSegmenter, Oracles};
use objremove_core::pipeline::{self, PipelineConfig, Progress, PropagationResult, Stage};
use objremove_core::prompts::{segment_objects, ForegroundPoint, PromptError, PromptSet};
use objremove_core::{BinaryMask, PixelPoint};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub state: JobState,
    pub progress: Progress,
    pub result_path: Option<PathBuf>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViewInfo {
    pub index: usize,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentRequest {
    pub foreground: Vec<ForegroundPoint>,
    #[serde(default)]
    pub background: Vec<PixelPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectMask {
    pub object_id: u32,
    pub rle: RleMask,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentResponse {
    pub masks: Vec<ObjectMask>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropagateRequest {
    pub prompts: PromptSet,
    #[serde(default)]
    pub config: Option<PipelineConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropagateResponse {
    pub job_id: String,
}

/// Error response with a stable machine-readable code.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn view_out_of_range(index: usize, views: usize) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "view_out_of_range",
            format!("view {index} out of range for {views} views"),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", r.body_text())
    }
}

impl From<PromptError> for ApiError {
    fn from(e: PromptError) -> Self {
        match e {
            PromptError::Segmenter { .. } | PromptError::Inpainter { .. } => {
                ApiError::new(StatusCode::BAD_GATEWAY, "oracle_failure", e.to_string())
            }
            _ => ApiError::new(StatusCode::BAD_REQUEST, "invalid_prompts", e.to_string()),
        }
    }
}

struct QueuedJob {
    id: String,
    prompts: PromptSet,
    config: PipelineConfig,
}

struct Inner {
    views: ViewSet,
    config: PipelineConfig,
    oracles: Oracles,
    segmenter: CheckedSegmenter,
    out_dir: PathBuf,
    jobs: Mutex<Vec<Job>>,
    latest: Mutex<Option<Arc<PropagationResult>>>,
    propagation: RwLock<()>,
    queue: Mutex<mpsc::Sender<QueuedJob>>,
}

/// Shared service state. Creating it starts the job worker thread, which
/// exits once every clone of the state is dropped.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(views: ViewSet, config: PipelineConfig, oracles: Oracles, out_dir: PathBuf) -> Self {
        let (tx, rx) = mpsc::channel();
        let segmenter = CheckedSegmenter::new(oracles.segmenter.clone());
        let inner = Arc::new(Inner {
            views,
            config,
            oracles,
            segmenter,
            out_dir,
            jobs: Mutex::new(Vec::new()),
            latest: Mutex::new(None),
            propagation: RwLock::new(()),
            queue: Mutex::new(tx),
        });
        let weak = Arc::downgrade(&inner);
        std::thread::spawn(move || {
            for job in rx {
                let Some(inner) = weak.upgrade() else { break };
                inner.execute(job);
            }
        });
        Self(inner)
    }

    pub fn job(&self, id: &str) -> Option<Job> {
        self.0.jobs.lock().unwrap().iter().find(|j| j.id == id).cloned()
    }
}

impl Inner {
    fn update(&self, id: &str, f: impl FnOnce(&mut Job)) {
        if let Some(j) = self.jobs.lock().unwrap().iter_mut().find(|j| j.id == id) {
            f(j);
        }
    }

    fn execute(&self, job: QueuedJob) {
        let _exclusive = self.propagation.write().unwrap();
        self.update(&job.id, |j| j.state = JobState::Running);
        info!("job {} started", job.id);
        let on_progress = |p: Progress| self.update(&job.id, |j| j.progress = p);
        let dir = self.out_dir.join("jobs").join(&job.id);
        let outcome = pipeline::run_with_progress(&self.views, &job.prompts, &self.oracles, &job.config, &on_progress)
            .and_then(|r| r.write(&self.views, &dir).map(|_| r));
        match outcome {
            Ok(r) => {
                let n = self.views.len();
                *self.latest.lock().unwrap() = Some(Arc::new(r));
                self.update(&job.id, |j| {
                    j.state = JobState::Done;
                    j.result_path = Some(dir.clone());
                    j.progress = Progress {
                        stage: Stage::Done,
                        views_done: n,
                        views_total: n,
                    };
                });
                info!("job {} done", job.id);
            }
            Err(e) => {
                error!("job {} failed: {e}", job.id);
                self.update(&job.id, |j| {
                    j.state = JobState::Failed;
                    j.error = Some(e.to_string());
                });
            }
        }
    }

    fn check_view(&self, i: usize) -> Result<(), ApiError> {
        if i < self.views.len() {
            Ok(())
        } else {
            Err(ApiError::view_out_of_range(i, self.views.len()))
        }
    }
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], Bytes::from(bytes)).into_response()
}

fn object_masks(masks: &[BinaryMask]) -> Vec<ObjectMask> {
    masks
        .iter()
        .enumerate()
        .map(|(k, m)| ObjectMask {
            object_id: k as u32 + 1,
            rle: RleMask::from(m),
        })
        .collect()
}

async fn list_views(State(s): State<AppState>) -> Json<Vec<ViewInfo>> {
    let (width, height) = s.0.views.dimensions();
    Json((0..s.0.views.len()).map(|index| ViewInfo { index, width, height }).collect())
}

async fn view_image(State(s): State<AppState>, Path(i): Path<usize>) -> Result<Response, ApiError> {
    s.0.check_view(i)?;
    let bytes = encode_rgb_png(s.0.views.view(i)).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    Ok(png(bytes))
}

async fn segment(
    State(s): State<AppState>,
    Path(i): Path<usize>,
    body: Result<Json<SegmentRequest>, JsonRejection>,
) -> Result<Json<SegmentResponse>, ApiError> {
    let Json(req) = body?;
    s.0.check_view(i)?;
    let prompts = PromptSet {
        view_index: i,
        foreground: req.foreground,
        background: req.background,
        region: None,
    };
    let inner = s.0.clone();
    let masks = tokio::task::spawn_blocking(move || {
        let _shared = inner.propagation.read().unwrap();
        segment_objects(inner.views.view(i), &prompts, &inner.segmenter)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(SegmentResponse {
        masks: object_masks(&masks),
    }))
}

async fn propagate(
    State(s): State<AppState>,
    body: Result<Json<PropagateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<PropagateResponse>), ApiError> {
    let Json(req) = body?;
    let config = req.config.unwrap_or_else(|| s.0.config.clone());
    config
        .validate()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_config", e.to_string()))?;
    if req.prompts.view_index >= s.0.views.len() {
        return Err(ApiError::view_out_of_range(req.prompts.view_index, s.0.views.len()));
    }
    let (w, h) = s.0.views.dimensions();
    req.prompts.validate(w, h)?;

    let mut jobs = s.0.jobs.lock().unwrap();
    let id = format!("job-{}", jobs.len() + 1);
    jobs.push(Job {
        id: id.clone(),
        state: JobState::Queued,
        progress: Progress {
            stage: Stage::Interaction,
            views_done: 0,
            views_total: s.0.views.len(),
        },
        result_path: None,
        error: None,
    });
    let sent = s.0.queue.lock().unwrap().send(QueuedJob {
        id: id.clone(),
        prompts: req.prompts,
        config,
    });
    if sent.is_err() {
        jobs.pop();
        return Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "worker_stopped", "job worker is not running"));
    }
    Ok((StatusCode::ACCEPTED, Json(PropagateResponse { job_id: id })))
}

async fn get_job(State(s): State<AppState>, Path(id): Path<String>) -> Result<Json<Job>, ApiError> {
    s.job(&id)
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "job_not_found", format!("no job {id}")))
}

fn latest(s: &AppState, j: usize) -> Result<Arc<PropagationResult>, ApiError> {
    s.0.check_view(j)?;
    s.0.latest
        .lock()
        .unwrap()
        .clone()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "no_result", "no propagation has completed"))
}

async fn result_image(State(s): State<AppState>, Path(j): Path<usize>) -> Result<Response, ApiError> {
    let r = latest(&s, j)?;
    let bytes = encode_rgb_png(&r.views[j].inpainted).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    Ok(png(bytes))
}

async fn result_masks(State(s): State<AppState>, Path(j): Path<usize>) -> Result<Json<Vec<ObjectMask>>, ApiError> {
    let r = latest(&s, j)?;
    Ok(Json(object_masks(&r.views[j].masks)))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/views", get(list_views))
        .route("/api/views/{i}/image", get(view_image))
        .route("/api/views/{i}/segment", post(segment))
        .route("/api/propagate", post(propagate))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/results/{j}/image", get(result_image))
        .route("/api/results/{j}/masks", get(result_masks))
        .fallback(not_found)
        .with_state(state)
}

/// Binds `127.0.0.1:port` and serves until the process is stopped.
pub async fn serve(state: AppState, port: u16) -> Result<(), CliError> {
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| CliError::Invalid(format!("cannot bind {addr}: {e}")))?;
    info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
