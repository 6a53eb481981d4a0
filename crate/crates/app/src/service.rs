//! JSON HTTP API over the assessment engine. Spaces are immutable once
//! imported and persisted as `<data_dir>/<space_id>.json`.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use serde_json::json;
use variety_core::analysis::{ClusterMethod, Dendrogram};
use variety_core::concept::{validate_space, AbstractionLevel, Concept, ConceptSpace, ValidationReport};

use crate::config::RunConfig;
use crate::io::{space_from_csv, to_json, IoError};
use crate::report::{assess_space, ClusterSection, EngineError, ResultDocument};

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("unknown space {0:?}")]
    NotFound(String),
    #[error("space {0:?} is being imported by another request")]
    Conflict(String),
    #[error("embedding provider failed: {0}")]
    Provider(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Provider(_) => StatusCode::BAD_GATEWAY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(json!({ "error": self.to_string() }))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::BadRequest(r.body_text())
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        if e.is_provider_failure() {
            ApiError::Provider(e.to_string())
        } else {
            ApiError::BadRequest(e.to_string())
        }
    }
}

impl From<IoError> for ApiError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } => ApiError::Internal(e.to_string()),
            _ => ApiError::BadRequest(e.to_string()),
        }
    }
}

pub struct AppState {
    data_dir: PathBuf,
    spaces: RwLock<HashMap<String, Arc<ConceptSpace>>>,
    latest: RwLock<HashMap<String, Arc<ResultDocument>>>,
    importing: Mutex<HashSet<String>>,
}

/// Held while a space id is being (re)imported.
pub struct ImportGuard<'a> {
    state: &'a AppState,
    id: String,
}

impl Drop for ImportGuard<'_> {
    fn drop(&mut self) {
        self.state.importing.lock().remove(&self.id);
    }
}

impl AppState {
    /// Opens `data_dir`, creating it if needed, and loads every stored space.
    pub fn open(data_dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(data_dir)?;
        let mut spaces = HashMap::new();
        let mut entries: Vec<_> = std::fs::read_dir(data_dir)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.path());
        for entry in entries {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            match serde_json::from_str::<ConceptSpace>(&text) {
                Ok(space) => {
                    spaces.insert(space.space_id.clone(), Arc::new(space));
                }
                Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
            }
        }
        Ok(Self {
            data_dir: data_dir.to_path_buf(),
            spaces: RwLock::new(spaces),
            latest: RwLock::new(HashMap::new()),
            importing: Mutex::new(HashSet::new()),
        })
    }

    /// Claims `id` for import; `None` if another import holds it.
    pub fn begin_import(&self, id: &str) -> Option<ImportGuard<'_>> {
        if self.importing.lock().insert(id.to_string()) {
            Some(ImportGuard {
                state: self,
                id: id.to_string(),
            })
        } else {
            None
        }
    }

    pub fn space(&self, id: &str) -> Result<Arc<ConceptSpace>, ApiError> {
        self.spaces
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    fn store(&self, space: ConceptSpace) -> Result<(), ApiError> {
        let path = self.data_dir.join(format!("{}.json", space.space_id));
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, to_json(&space))
            .and_then(|_| std::fs::rename(&tmp, &path))
            .map_err(|e| ApiError::Internal(format!("{}: {e}", path.display())))?;
        let id = space.space_id.clone();
        self.latest.write().remove(&id);
        self.spaces.write().insert(id, Arc::new(space));
        Ok(())
    }

    /// Latest assessment, or a default one computed now.
    fn latest_or_default(&self, space: &ConceptSpace) -> Result<Arc<ResultDocument>, ApiError> {
        if let Some(doc) = self.latest.read().get(&space.space_id) {
            return Ok(doc.clone());
        }
        let doc = Arc::new(assess_space(space, &RunConfig::default())?);
        self.latest.write().insert(space.space_id.clone(), doc.clone());
        Ok(doc)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/spaces", post(import).get(list))
        .route("/spaces/{id}", get(get_space))
        .route("/spaces/{id}/assess", post(run_assess))
        .route("/spaces/{id}/cluster", post(run_cluster))
        .route("/spaces/{id}/dendrogram", get(get_dendrogram))
        .route("/spaces/{id}/concepts/{concept_id}/instances/{instance_id}", get(instance_detail))
        .with_state(state)
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

/// Either a space table as CSV text or a list of concepts.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportRequest {
    pub space_id: Option<String>,
    #[serde(default)]
    pub problem: String,
    pub csv: Option<String>,
    pub concepts: Option<Vec<Concept>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ImportResponse {
    pub space_id: String,
    pub concepts: usize,
    pub instances: usize,
    pub validation: ValidationReport,
}

fn check_id(id: &str) -> Result<(), ApiError> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(ApiError::BadRequest(format!(
            "space id {id:?} must be 1-64 characters of [A-Za-z0-9_-]"
        )))
    }
}

async fn import(
    State(state): State<Arc<AppState>>,
    body: Result<Json<ImportRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<ImportResponse>), ApiError> {
    let Json(req) = body?;
    let id = req
        .space_id
        .clone()
        .unwrap_or_else(|| uuid::Uuid::new_v4().simple().to_string());
    check_id(&id)?;
    let _guard = state
        .begin_import(&id)
        .ok_or_else(|| ApiError::Conflict(id.clone()))?;

    let mut space = match (req.csv, req.concepts) {
        (Some(csv), None) => space_from_csv(&csv, &id)?,
        (None, Some(concepts)) => {
            let text = serde_json::to_string(&json!({ "space_id": id, "concepts": concepts }))
                .map_err(|e| ApiError::Internal(e.to_string()))?;
            crate::io::space_from_json(&text)?
        }
        _ => return Err(ApiError::BadRequest("provide exactly one of \"csv\" or \"concepts\"".into())),
    };
    space.problem = req.problem;
    let validation = validate_space(&space);
    if let Some(first) = validation.errors().next() {
        return Err(ApiError::BadRequest(format!("invalid space: {}", first.message)));
    }
    let response = ImportResponse {
        space_id: id,
        concepts: space.len(),
        instances: space.concepts.iter().map(|c| c.instances.len()).sum(),
        validation,
    };
    state.store(space)?;
    Ok((StatusCode::CREATED, Json(response)))
}

async fn list(State(state): State<Arc<AppState>>) -> Json<Vec<String>> {
    let mut ids: Vec<String> = state.spaces.read().keys().cloned().collect();
    ids.sort();
    Json(ids)
}

async fn get_space(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<ConceptSpace>, ApiError> {
    Ok(Json(state.space(&id)?.as_ref().clone()))
}

async fn run_assess(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<RunConfig>, JsonRejection>,
) -> Result<Json<ResultDocument>, ApiError> {
    let space = state.space(&id)?;
    let Json(config) = body?;
    if config.k == Some(0) {
        return Err(ApiError::BadRequest("k must be at least 1".into()));
    }
    let doc = tokio::task::spawn_blocking(move || assess_space(&space, &config))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    state.latest.write().insert(id, Arc::new(doc.clone()));
    Ok(Json(doc))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterRequest {
    pub k: usize,
    #[serde(default)]
    pub method: ClusterMethod,
}

async fn run_cluster(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<ClusterRequest>, JsonRejection>,
) -> Result<Json<ClusterSection>, ApiError> {
    let space = state.space(&id)?;
    let Json(req) = body?;
    if req.k == 0 || req.k > space.len() {
        return Err(ApiError::BadRequest(format!(
            "k must be between 1 and {} for this space, got {}",
            space.len(),
            req.k
        )));
    }
    let state2 = state.clone();
    let doc = tokio::task::spawn_blocking(move || state2.latest_or_default(&space))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let mut doc = doc.as_ref().clone();
    let section = doc.cluster(req.k, req.method)?.clone();
    state.latest.write().insert(id, Arc::new(doc));
    Ok(Json(section))
}

async fn get_dendrogram(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<Dendrogram>, ApiError> {
    let space = state.space(&id)?;
    let state2 = state.clone();
    let doc = tokio::task::spawn_blocking(move || state2.latest_or_default(&space))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    doc.dendrogram
        .clone()
        .map(Json)
        .ok_or_else(|| ApiError::Internal("assessment has no dendrogram".into()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConstructDetail {
    pub level: AbstractionLevel,
    pub name: String,
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceDetail {
    pub space_id: String,
    pub concept_id: u32,
    pub concept_name: String,
    pub instance_id: u32,
    pub constructs: Vec<ConstructDetail>,
}

async fn instance_detail(
    State(state): State<Arc<AppState>>,
    UrlPath((id, concept_id, instance_id)): UrlPath<(String, u32, u32)>,
) -> Result<Json<InstanceDetail>, ApiError> {
    let space = state.space(&id)?;
    let concept = space
        .concept(concept_id)
        .ok_or_else(|| ApiError::NotFound(format!("{id}/concepts/{concept_id}")))?;
    let instance = concept
        .instances
        .iter()
        .find(|i| i.instance_id == instance_id)
        .ok_or_else(|| ApiError::NotFound(format!("{id}/concepts/{concept_id}/instances/{instance_id}")))?;
    Ok(Json(InstanceDetail {
        space_id: id,
        concept_id,
        concept_name: concept.name.clone(),
        instance_id,
        constructs: AbstractionLevel::ALL
            .iter()
            .map(|&level| ConstructDetail {
                level,
                name: level.display_name().to_string(),
                text: instance.construct(level).to_string(),
            })
            .collect(),
    }))
}

/// Binds and serves until Ctrl-C.
pub async fn serve(bind: &str, data_dir: &Path) -> anyhow::Result<()> {
    let state = Arc::new(AppState::open(data_dir)?);
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
