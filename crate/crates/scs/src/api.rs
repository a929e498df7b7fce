//! HTTP service over a workspace.
//!
//! Readers clone the current snapshot (an `Arc<Workspace>`) and never wait on
//! writers. Writers queue on a single mutex, validate against the latest
//! snapshot, persist atomically and only then swap the snapshot in.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use scs_core::{
    derive_form_schema, enumerate_paths, validate_annotation, CorpusError, ParseError, PublicationMode, Report,
    SegmentFilter, StoryError, StratumKind,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::workspace::{
    graph_field, segment_from_file, CorpusFile, Finding, LoadError, OpenError, SegmentFile, Workspace, MAIN_CORPUS,
};

pub const DEFAULT_MAX_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub http_status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError { http_status: status.as_u16(), code: code.into(), message: message.into(), details: Value::Null }
    }

    pub fn with_details(mut self, details: impl Serialize) -> Self {
        self.details = serde_json::to_value(details).unwrap_or(Value::Null);
        self
    }

    pub fn not_found(code: &str, what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, format!("unknown {what} `{id}`"))
    }

    /// A 400 whose code is the first issue of the report.
    pub fn report(message: impl Into<String>, report: &Report) -> Self {
        let code = report.issues().first().map(|i| i.code.as_str()).unwrap_or("InvalidInput");
        Self::new(StatusCode::BAD_REQUEST, code, message).with_details(report)
    }

    pub fn io(err: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Io", err.to_string())
    }

    fn parse(err: &ParseError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "ParseError", err.message.clone()).with_details(err)
    }

    fn body(err: serde_json::Error) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "InvalidBody", err.to_string())
    }
}

impl From<StoryError> for ApiError {
    fn from(e: StoryError) -> Self {
        match &e {
            StoryError::InvalidScenario(r) => {
                Self::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()).with_details(r)
            }
            StoryError::InvalidRequirement { report, .. } => {
                Self::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()).with_details(report)
            }
            StoryError::InvalidMaxLen => Self::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()),
        }
    }
}

impl From<CorpusError> for ApiError {
    fn from(e: CorpusError) -> Self {
        match &e {
            CorpusError::AnnotationInvalid(r) | CorpusError::InvalidModel(r) => Self::report(e.to_string(), r),
            _ => Self::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()),
        }
    }
}

impl From<LoadError> for ApiError {
    fn from(e: LoadError) -> Self {
        match &e {
            LoadError::Notation { error, .. } => Self::parse(error),
            LoadError::Shape { .. } => Self::new(StatusCode::BAD_REQUEST, "InvalidBody", e.to_string()),
            _ => Self::io(e),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.http_status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct AppState {
    root: PathBuf,
    snapshot: RwLock<Arc<Workspace>>,
    writer: tokio::sync::Mutex<()>,
}

impl AppState {
    pub fn new(ws: Workspace) -> Arc<Self> {
        Arc::new(AppState { root: ws.root.clone(), snapshot: RwLock::new(Arc::new(ws)), writer: Default::default() })
    }

    pub fn snapshot(&self) -> Arc<Workspace> {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn swap(&self, ws: Workspace) {
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(ws);
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/ontology", get(ontology))
        .route("/api/models", get(models))
        .route("/api/models/{id}", get(model))
        .route("/api/models/{id}/form", get(form))
        .route("/api/corpora/{id}", get(corpus))
        .route("/api/corpora/{id}/segments", get(corpus_segments).post(create_segment))
        .route("/api/corpora/{id}/segments/{sid}", get(segment).put(update_segment))
        .route("/api/segments", get(query_segments))
        .route("/api/media/{id}/at/{t_ms}", get(at_instant))
        .route("/api/validate", post(validate))
        .route("/api/scenarios", get(scenarios))
        .route("/api/scenarios/{id}", get(scenario))
        .route("/api/scenarios/{id}/paths", get(paths))
        .route("/api/scenarios/{id}/publish", post(publish))
        .route("/api/publications/{id}", get(publication))
        .route("/api/reload", post(reload))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such endpoint") })
        .with_state(state)
}

type St = State<Arc<AppState>>;

async fn ontology(State(st): St) -> Json<Value> {
    Json(json!(st.snapshot().ontology.to_document()))
}

async fn models(State(st): St) -> Json<Value> {
    let ws = st.snapshot();
    Json(json!(ws.corpus.models().collect::<Vec<_>>()))
}

async fn model(State(st): St, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let ws = st.snapshot();
    let m = ws.corpus.model(&id).ok_or_else(|| ApiError::not_found("UnknownModel", "model", &id))?;
    Ok(Json(json!(m)))
}

async fn form(State(st): St, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let ws = st.snapshot();
    let m = ws.corpus.model(&id).ok_or_else(|| ApiError::not_found("UnknownModel", "model", &id))?;
    Ok(Json(json!(derive_form_schema(&ws.ontology, m)?)))
}

fn check_corpus(id: &str) -> ApiResult<()> {
    if id == MAIN_CORPUS {
        Ok(())
    } else {
        Err(ApiError::not_found("UnknownCorpus", "corpus", id))
    }
}

#[derive(Serialize)]
struct CorpusView {
    id: &'static str,
    #[serde(flatten)]
    file: CorpusFile,
}

async fn corpus(State(st): St, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    check_corpus(&id)?;
    Ok(Json(json!(CorpusView { id: MAIN_CORPUS, file: st.snapshot().corpus_file() })))
}

async fn corpus_segments(State(st): St, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    check_corpus(&id)?;
    let ws = st.snapshot();
    Ok(Json(json!(ws.corpus.segments().map(SegmentFile::from).collect::<Vec<_>>())))
}

async fn segment(State(st): St, Path((id, sid)): Path<(String, String)>) -> ApiResult<Json<Value>> {
    check_corpus(&id)?;
    let ws = st.snapshot();
    let s = ws.corpus.segment(&sid).ok_or_else(|| ApiError::not_found("UnknownSegment", "segment", &sid))?;
    Ok(Json(json!(SegmentFile::from(s))))
}

async fn create_segment(State(st): St, Path(id): Path<String>, body: Bytes) -> ApiResult<(StatusCode, Json<Value>)> {
    check_corpus(&id)?;
    let file: SegmentFile = serde_json::from_slice(&body).map_err(ApiError::body)?;
    let saved = write_segment(&st, file, None).await?;
    Ok((StatusCode::CREATED, Json(json!(saved))))
}

async fn update_segment(State(st): St, Path((id, sid)): Path<(String, String)>, body: Bytes) -> ApiResult<Json<Value>> {
    check_corpus(&id)?;
    let file: SegmentFile = serde_json::from_slice(&body).map_err(ApiError::body)?;
    if file.id != sid {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "IdMismatch",
            format!("body id `{}` does not match path id `{sid}`", file.id),
        ));
    }
    let saved = write_segment(&st, file, Some(sid)).await?;
    Ok(Json(json!(saved)))
}

/// Creates (`update == None`) or replaces a segment. On update the body's
/// `version` must equal the stored one; the stored version then increments.
async fn write_segment(st: &Arc<AppState>, mut file: SegmentFile, update: Option<String>) -> ApiResult<SegmentFile> {
    let _guard = st.writer.lock().await;
    let ws = st.snapshot();
    let existing = ws.corpus.segment(&file.id);
    file.version = match (&update, existing) {
        (None, Some(_)) => {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "DuplicateId",
                format!("segment `{}` already exists", file.id),
            ))
        }
        (None, None) => 1,
        (Some(sid), None) => return Err(ApiError::not_found("UnknownSegment", "segment", sid)),
        (Some(_), Some(cur)) if cur.version != file.version => {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "VersionConflict",
                format!("segment `{}` is at version {}, not {}", file.id, cur.version, file.version),
            )
            .with_details(json!({ "current_version": cur.version })))
        }
        (Some(_), Some(cur)) => cur.version + 1,
    };
    let seg = segment_from_file(&st.root.join("corpus.json"), file)?;
    let saved = SegmentFile::from(&seg);
    let corpus = ws.corpus.upsert_segment(&ws.ontology, seg)?;
    let ws = Arc::clone(&ws);
    let next = tokio::task::spawn_blocking(move || ws.save_corpus(corpus))
        .await
        .map_err(ApiError::io)?
        .map_err(ApiError::io)?;
    st.swap(next);
    Ok(saved)
}

fn parse_u64(params: &HashMap<String, String>, key: &str) -> ApiResult<Option<u64>> {
    params
        .get(key)
        .map(|v| {
            v.parse::<u64>().map_err(|_| {
                ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "InvalidQuery",
                    format!("`{key}` must be a non-negative integer"),
                )
            })
        })
        .transpose()
}

/// Builds a filter from `concept`, `marker`, `relation`, `stratum`,
/// `from_ms`, `to_ms` and `model`. A window with one bound open extends to
/// the start or the end of time.
pub fn filter_from_params(params: &HashMap<String, String>) -> ApiResult<SegmentFilter> {
    let stratum_kind = match params.get("stratum") {
        None => None,
        Some(k) => Some(StratumKind::parse(k).ok_or_else(|| {
            ApiError::new(StatusCode::BAD_REQUEST, "InvalidQuery", format!("unknown stratum kind `{k}`"))
        })?),
    };
    let from = parse_u64(params, "from_ms")?;
    let to = parse_u64(params, "to_ms")?;
    let time_window = match (from, to) {
        (None, None) => None,
        (f, t) => Some((f.unwrap_or(0), t.unwrap_or(u64::MAX))),
    };
    Ok(SegmentFilter {
        concept: params.get("concept").cloned(),
        marker: params.get("marker").cloned(),
        relation: params.get("relation").cloned(),
        stratum_kind,
        time_window,
        model: params.get("model").cloned(),
    })
}

async fn query_segments(State(st): St, Query(params): Query<HashMap<String, String>>) -> ApiResult<Json<Value>> {
    let filter = filter_from_params(&params)?;
    let ws = st.snapshot();
    let hits = ws.corpus.query_segments(&ws.ontology, &filter)?;
    Ok(Json(json!(hits.into_iter().map(SegmentFile::from).collect::<Vec<_>>())))
}

async fn at_instant(State(st): St, Path((id, t_ms)): Path<(String, String)>) -> ApiResult<Json<Value>> {
    let t: u64 = t_ms
        .parse()
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "InvalidQuery", "t_ms must be a non-negative integer"))?;
    let ws = st.snapshot();
    if ws.corpus.media_resource(&id).is_none() {
        return Err(ApiError::not_found("UnknownMedia", "media", &id));
    }
    let groups = ws.corpus.segments_at_instant(&id, t)?;
    let strata: BTreeMap<&str, Vec<SegmentFile>> =
        groups.into_iter().map(|(k, segs)| (k.as_str(), segs.into_iter().map(SegmentFile::from).collect())).collect();
    Ok(Json(json!({ "media_id": id, "t_ms": t, "strata": strata })))
}

#[derive(Deserialize)]
struct ValidateBody {
    model_id: String,
    #[serde(default)]
    annotation: Option<scs_core::ConceptualGraph>,
    #[serde(default)]
    annotation_text: Option<String>,
}

async fn validate(State(st): St, body: Bytes) -> ApiResult<Json<Value>> {
    let body: ValidateBody = serde_json::from_slice(&body).map_err(ApiError::body)?;
    let ws = st.snapshot();
    let model =
        ws.corpus.model(&body.model_id).ok_or_else(|| ApiError::not_found("UnknownModel", "model", &body.model_id))?;
    let g =
        graph_field(std::path::Path::new("request"), "annotation", body.annotation, body.annotation_text.as_deref())?;
    let report = validate_annotation(&ws.ontology, model, &g);
    Ok(Json(json!({ "valid": report.is_empty(), "report": report })))
}

async fn scenarios(State(st): St) -> Json<Value> {
    Json(json!(st.snapshot().scenarios.values().collect::<Vec<_>>()))
}

async fn scenario(State(st): St, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let ws = st.snapshot();
    let s = ws.scenarios.get(&id).ok_or_else(|| ApiError::not_found("UnknownScenario", "scenario", &id))?;
    Ok(Json(json!(s)))
}

async fn paths(
    State(st): St,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let max_len = parse_u64(&params, "max_len")?.map(|n| n as usize).unwrap_or(DEFAULT_MAX_LEN);
    let ws = st.snapshot();
    let s = ws.scenarios.get(&id).ok_or_else(|| ApiError::not_found("UnknownScenario", "scenario", &id))?;
    let paths = enumerate_paths(s, max_len)?;
    Ok(Json(json!({ "scenario_id": id, "max_len": max_len, "paths": paths })))
}

pub fn parse_mode(s: &str) -> ApiResult<PublicationMode> {
    match s {
        "fixed" => Ok(PublicationMode::Fixed),
        "open" => Ok(PublicationMode::Open),
        _ => Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "InvalidQuery",
            format!("mode must be `fixed` or `open`, not `{s}`"),
        )),
    }
}

async fn publish(
    State(st): St,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let mode = parse_mode(params.get("mode").map(String::as_str).unwrap_or("fixed"))?;
    let _guard = st.writer.lock().await;
    let ws = st.snapshot();
    let s = ws.scenarios.get(&id).ok_or_else(|| ApiError::not_found("UnknownScenario", "scenario", &id))?;
    let publication = ws.compile(s, mode)?;
    let path = ws.publication_path(&id);
    let manifest = publication.manifest.clone();
    tokio::task::spawn_blocking(move || crate::fsio::write_json(&path, &manifest))
        .await
        .map_err(ApiError::io)?
        .map_err(ApiError::io)?;
    Ok(Json(json!({ "manifest": publication.manifest, "warnings": publication.warnings })))
}

async fn publication(State(st): St, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    if id.contains(['/', '\\']) || id.starts_with('.') {
        return Err(ApiError::not_found("UnknownPublication", "publication", &id));
    }
    let path = st.snapshot().publication_path(&id);
    let bytes = match tokio::fs::read(&path).await {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(ApiError::not_found("UnknownPublication", "publication", &id))
        }
        Err(e) => return Err(ApiError::io(e)),
    };
    let v: Value = serde_json::from_slice(&bytes).map_err(ApiError::io)?;
    Ok(Json(v))
}

/// Re-reads the workspace from disk. An invalid workspace leaves the
/// current snapshot in place.
async fn reload(State(st): St) -> ApiResult<Json<Value>> {
    let _guard = st.writer.lock().await;
    let root = st.root.clone();
    let opened = tokio::task::spawn_blocking(move || Workspace::open(&root)).await.map_err(ApiError::io)?;
    match opened {
        Ok(ws) => {
            st.swap(ws);
            Ok(Json(json!({ "reloaded": true })))
        }
        Err(OpenError::Invalid(findings)) => Err(invalid_workspace(&findings)),
        Err(OpenError::Load(e)) => Err(ApiError::new(StatusCode::BAD_REQUEST, "Unparseable", e.to_string())),
    }
}

pub fn invalid_workspace(findings: &[Finding]) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, "InvalidWorkspace", format!("{} violation(s)", findings.len()))
        .with_details(findings)
}
