//! The HTTP session API.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::{Mutex, RwLock};
use ufbd_core::config::ConfigFile;
use ufbd_core::dialogue::{Polarity, PresentationStrategy};
use ufbd_core::Error as CoreError;

use crate::session::{FeedbackItem, Rejection, Session};

pub struct AppState {
    dir: PathBuf,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    /// Opens a state directory and reloads every session in it.
    pub fn open(dir: &Path) -> anyhow::Result<AppState> {
        std::fs::create_dir_all(dir)?;
        let mut sessions = BTreeMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "jsonl") {
                match Session::load(&path) {
                    Ok(s) => {
                        sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
                    }
                    Err(e) => tracing::warn!("skipping {}: {e:#}", path.display()),
                }
            }
        }
        tracing::info!("loaded {} sessions from {}", sessions.len(), dir.display());
        Ok(AppState { dir: dir.to_path_buf(), sessions: RwLock::new(sessions) })
    }

    async fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        let status = match e.downcast_ref::<CoreError>() {
            Some(CoreError::ResourceLimit(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            Some(CoreError::Io(_)) | None => StatusCode::INTERNAL_SERVER_ERROR,
            Some(_) => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, format!("{e:#}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

fn to_json(v: impl serde::Serialize) -> ApiResult {
    serde_json::to_value(v).map(Json).map_err(|e| ApiError::from(anyhow::Error::from(e)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    config: ConfigFile,
    #[serde(default)]
    presenter: Option<PresentationStrategy>,
}

/// The body is either a bare config or `{config, presenter}`.
async fn create(State(app): State<Arc<AppState>>, Json(req): Json<Value>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let parsed = if req.get("config").is_some() {
        serde_json::from_value::<CreateRequest>(req).map(|r| (r.config, r.presenter))
    } else {
        serde_json::from_value::<ConfigFile>(req).map(|c| (c, None))
    };
    let (file, presenter) = parsed.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("invalid config: {e}")))?;
    let presenter = presenter.unwrap_or(PresentationStrategy::Canonical);
    let dir = app.dir.clone();
    let s = tokio::task::spawn_blocking(move || Session::create(&dir, &file, presenter))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let body = json!({
        "id": s.id,
        "presentation": s.presentation(),
        "terminal": s.terminal()?,
    });
    tracing::info!("created session {}", s.id);
    app.sessions.write().await.insert(s.id.clone(), Arc::new(Mutex::new(s)));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn summary(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let s = app.get(&id).await?;
    let s = s.lock().await;
    to_json(s.summary()?)
}

async fn presentation(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let s = app.get(&id).await?;
    let s = s.lock().await;
    let mut v = serde_json::to_value(s.presentation()).map_err(anyhow::Error::from)?;
    if let Some(t) = s.terminal()? {
        v["terminal"] = serde_json::to_value(t).map_err(anyhow::Error::from)?;
    }
    Ok(Json(v))
}

async fn transcript(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let s = app.get(&id).await?;
    let s = s.lock().await;
    to_json(s.transcript()?)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct FeedbackEntry {
    property_key: String,
    polarity: Polarity,
}

#[derive(Deserialize)]
struct FeedbackRequest {
    turn: usize,
    items: Vec<FeedbackEntry>,
}

async fn feedback(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<FeedbackRequest>,
) -> Result<Json<Value>, ApiError> {
    let s = app.get(&id).await?;
    let mut s = s.lock().await;
    let items: Vec<FeedbackItem> =
        req.items.into_iter().map(|e| FeedbackItem { property_key: e.property_key, polarity: e.polarity }).collect();
    let rejected = |status: StatusCode, body: Value| ApiError { status, body };
    match s.feedback(req.turn, &items)? {
        Ok(()) => Ok(Json(match s.terminal()? {
            Some(t) => json!({ "accepted": true, "terminal": t }),
            None => json!({ "accepted": true, "next": s.presentation() }),
        })),
        Err(Rejection::StaleTurn { expected }) => Err(rejected(
            StatusCode::CONFLICT,
            json!({ "accepted": false, "error": format!("turn {} is stale", req.turn), "expectedTurn": expected }),
        )),
        Err(Rejection::Ended) => {
            Err(rejected(StatusCode::CONFLICT, json!({ "accepted": false, "error": "the dialogue has ended" })))
        }
        Err(Rejection::UnknownProperty(k)) => Err(rejected(
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({ "accepted": false, "error": format!("unknown property `{k}`") }),
        )),
        Err(Rejection::Violations(v)) => {
            Err(rejected(StatusCode::UNPROCESSABLE_ENTITY, json!({ "accepted": false, "violations": v })))
        }
    }
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(summary))
        .route("/sessions/{id}/presentation", get(presentation))
        .route("/sessions/{id}/feedback", post(feedback))
        .route("/sessions/{id}/transcript", get(transcript))
        .with_state(app)
}

pub async fn serve(port: u16, dir: &Path) -> anyhow::Result<()> {
    let app = Arc::new(AppState::open(dir)?);
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app)).await?;
    Ok(())
}
