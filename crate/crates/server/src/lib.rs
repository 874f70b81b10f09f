//! HTTP curation service over a [`CorpusStore`].
//!
//! All bodies are JSON. Errors have the shape
//! `{"error": {"code": "not_found", "message": "..."}}`.
//!
//! | method | path                      | access  |
//! |--------|---------------------------|---------|
//! | GET    | `/similes`                | public for `status=approved` (the default), curator otherwise |
//! | GET    | `/similes/search?q=`      | public (approved only); curators may pass `status` |
//! | POST   | `/similes`                | public, rate limited per IP |
//! | POST   | `/similes/{id}/approve`   | curator |
//! | POST   | `/similes/{id}/reject`    | curator |
//! | POST   | `/similes/{id}/reopen`    | curator |
//! | PUT    | `/similes/{id}`           | curator |
//! | GET    | `/pending`                | curator |
//! | GET    | `/stats`                  | public |
//! | POST   | `/login`                  | public |
//!
//! Curator requests carry `Authorization: Bearer <token>` with a token from
//! `/login`.

pub mod config;

use std::collections::{HashMap, VecDeque};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{ConnectInfo, Path, Query, State};
use axum::http::header::AUTHORIZATION;
use axum::http::{Extensions, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use simile_core::store::{
    CorpusEntry, CorpusStats, CorpusStore, ListFilter, Origin, PageRequest, Provenance, Similar, Status, StoreError,
};

pub use config::{Config, ConfigError};

const MAX_PAGE_SIZE: usize = 500;
const RATE_WINDOW: Duration = Duration::from_secs(60);
const CURATOR: &str = "curator";

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    Unauthorized,
    NotFound(String),
    Conflict(String),
    TooManyRequests,
    Internal(String),
}

impl ApiError {
    fn parts(&self) -> (StatusCode, &'static str, String) {
        match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad_request", m.clone()),
            ApiError::Unauthorized => (
                StatusCode::UNAUTHORIZED,
                "unauthorized",
                "a valid curator token is required".into(),
            ),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, "not_found", m.clone()),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, "conflict", m.clone()),
            ApiError::TooManyRequests => (
                StatusCode::TOO_MANY_REQUESTS,
                "rate_limited",
                "too many additions from this address; try again later".into(),
            ),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m.clone()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code, message) = self.parts();
        if status.is_server_error() {
            log::error!("{message}");
        }
        (status, Json(json!({ "error": { "code": code, "message": message } }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownId(_) => ApiError::NotFound(e.to_string()),
            StoreError::IllegalTransition { .. } => ApiError::Conflict(e.to_string()),
            StoreError::EmptyText | StoreError::InvalidPage | StoreError::Key(_) => ApiError::BadRequest(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::NotFound(e.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Per-IP sliding window of recent additions.
#[derive(Debug, Default)]
struct RateLimiter {
    hits: HashMap<IpAddr, VecDeque<Instant>>,
}

impl RateLimiter {
    fn allow(&mut self, ip: IpAddr, limit: u32, now: Instant) -> bool {
        if limit == 0 {
            return true;
        }
        let q = self.hits.entry(ip).or_default();
        while q.front().is_some_and(|t| now.duration_since(*t) >= RATE_WINDOW) {
            q.pop_front();
        }
        if q.len() >= limit as usize {
            return false;
        }
        q.push_back(now);
        true
    }
}

pub struct AppState {
    config: Config,
    store: RwLock<CorpusStore>,
    sessions: Mutex<HashMap<String, Instant>>,
    limiter: Mutex<RateLimiter>,
}

impl AppState {
    pub fn new(store: CorpusStore, config: Config) -> Arc<Self> {
        Arc::new(AppState {
            config,
            store: RwLock::new(store),
            sessions: Mutex::new(HashMap::new()),
            limiter: Mutex::new(RateLimiter::default()),
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// Runs `f` against a read snapshot of the store.
    pub fn with_store<T>(&self, f: impl FnOnce(&CorpusStore) -> T) -> T {
        f(&self.store.read().unwrap_or_else(|p| p.into_inner()))
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, CorpusStore> {
        self.store.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, CorpusStore> {
        self.store.write().unwrap_or_else(|p| p.into_inner())
    }

    fn is_curator(&self, headers: &HeaderMap) -> bool {
        let Some(token) = headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
        else {
            return false;
        };
        let mut sessions = self.sessions.lock().unwrap_or_else(|p| p.into_inner());
        let now = Instant::now();
        sessions.retain(|_, expiry| *expiry > now);
        sessions.contains_key(token.trim())
    }

    fn require_curator(&self, headers: &HeaderMap) -> ApiResult<()> {
        if self.is_curator(headers) {
            Ok(())
        } else {
            Err(ApiError::Unauthorized)
        }
    }
}

/// Entry as shown to the public: no history, provenance or score.
#[derive(Debug, Serialize)]
struct PublicEntry<'a> {
    id: u64,
    text: &'a str,
    stem_key: String,
    status: Status,
    origin: Origin,
}

impl<'a> From<&'a CorpusEntry> for PublicEntry<'a> {
    fn from(e: &'a CorpusEntry) -> Self {
        PublicEntry {
            id: e.id,
            text: &e.text,
            stem_key: e.stem_key.to_string(),
            status: e.status,
            origin: e.origin,
        }
    }
}

fn entries_json(entries: &[&CorpusEntry], curator: bool) -> serde_json::Value {
    if curator {
        json!(entries)
    } else {
        json!(entries.iter().map(|e| PublicEntry::from(*e)).collect::<Vec<_>>())
    }
}

fn parse_status(s: Option<&str>) -> ApiResult<Option<Status>> {
    match s.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| ApiError::BadRequest(format!("unknown status {s:?}"))),
    }
}

#[derive(Debug, Deserialize)]
struct ListQuery {
    status: Option<String>,
    origin: Option<String>,
    prefix: Option<String>,
    page: Option<usize>,
    size: Option<usize>,
}

async fn list_similes(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    q: Result<Query<ListQuery>, QueryRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let Query(q) = q?;
    let status = parse_status(q.status.as_deref())?.unwrap_or(Status::Approved);
    let curator = state.is_curator(&headers);
    if status != Status::Approved && !curator {
        return Err(ApiError::Unauthorized);
    }
    let origin = match q.origin.as_deref().filter(|s| !s.is_empty()) {
        None => None,
        Some(o) => Some(
            o.parse::<Origin>()
                .map_err(|_| ApiError::BadRequest(format!("unknown origin {o:?}")))?,
        ),
    };
    let size = q.size.unwrap_or(PageRequest::default().size);
    if size > MAX_PAGE_SIZE {
        return Err(ApiError::BadRequest(format!("page size is limited to {MAX_PAGE_SIZE}")));
    }
    let filter = ListFilter {
        status: Some(status),
        origin,
        prefix: q.prefix.filter(|p| !p.is_empty()),
    };
    let store = state.read();
    let page = store.list(
        &filter,
        PageRequest {
            page: q.page.unwrap_or(1),
            size,
        },
    )?;
    Ok(Json(json!({
        "page": page.page,
        "page_size": page.page_size,
        "total": page.total,
        "pages": page.pages,
        "entries": entries_json(&page.entries, curator),
    })))
}

#[derive(Debug, Deserialize)]
struct SearchQuery {
    #[serde(default)]
    q: String,
    status: Option<String>,
}

async fn search_similes(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    q: Result<Query<SearchQuery>, QueryRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let Query(q) = q?;
    if q.q.trim().is_empty() {
        return Err(ApiError::BadRequest("query parameter q must not be empty".into()));
    }
    let requested = parse_status(q.status.as_deref())?;
    let status = match requested {
        None => Some(Status::Approved),
        Some(Status::Approved) => Some(Status::Approved),
        Some(s) => {
            state.require_curator(&headers)?;
            Some(s)
        }
    };
    let store = state.read();
    let hits = store.search(&q.q, store.threshold(), status)?;
    let results: Vec<Similar> = hits
        .into_iter()
        .map(|(e, similarity)| Similar {
            id: e.id,
            text: e.text.clone(),
            status: e.status,
            similarity,
        })
        .collect();
    Ok(Json(json!({ "query": q.q, "results": results })))
}

#[derive(Debug, Deserialize)]
struct AddBody {
    text: String,
    #[serde(default)]
    note: String,
}

fn client_ip(ext: &Extensions) -> IpAddr {
    ext.get::<ConnectInfo<SocketAddr>>()
        .map_or(IpAddr::V4(Ipv4Addr::UNSPECIFIED), |c| c.0.ip())
}

async fn add_simile(
    State(state): State<Arc<AppState>>,
    ext: Extensions,
    body: Result<Json<AddBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let Json(body) = body?;
    if body.text.trim().is_empty() {
        return Err(ApiError::BadRequest("text must not be empty".into()));
    }
    let ip = client_ip(&ext);
    let allowed =
        state
            .limiter
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .allow(ip, state.config.rate_limit, Instant::now());
    if !allowed {
        return Err(ApiError::TooManyRequests);
    }
    let outcome = state.write().add_entry(
        &body.text,
        Origin::Manual,
        Provenance::Contributor { note: body.note },
        "contributor",
    )?;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "entry_id": outcome.id, "similar": outcome.warnings })),
    ))
}

fn transition(
    state: &AppState,
    headers: &HeaderMap,
    id: Result<Path<u64>, PathRejection>,
    to: Status,
) -> ApiResult<Json<CorpusEntry>> {
    state.require_curator(headers)?;
    let Path(id) = id?;
    let mut store = state.write();
    Ok(Json(store.set_status(id, to, CURATOR)?.clone()))
}

async fn approve(
    State(s): State<Arc<AppState>>,
    h: HeaderMap,
    id: Result<Path<u64>, PathRejection>,
) -> ApiResult<Json<CorpusEntry>> {
    transition(&s, &h, id, Status::Approved)
}

async fn reject(
    State(s): State<Arc<AppState>>,
    h: HeaderMap,
    id: Result<Path<u64>, PathRejection>,
) -> ApiResult<Json<CorpusEntry>> {
    transition(&s, &h, id, Status::Rejected)
}

async fn reopen(
    State(s): State<Arc<AppState>>,
    h: HeaderMap,
    id: Result<Path<u64>, PathRejection>,
) -> ApiResult<Json<CorpusEntry>> {
    transition(&s, &h, id, Status::Pending)
}

#[derive(Debug, Deserialize)]
struct EditBody {
    text: String,
}

async fn edit_simile(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    id: Result<Path<u64>, PathRejection>,
    body: Result<Json<EditBody>, JsonRejection>,
) -> ApiResult<Json<CorpusEntry>> {
    let (Path(id), Json(body)) = (id?, body?);
    state.require_curator(&headers)?;
    let mut store = state.write();
    Ok(Json(store.edit_text(id, &body.text, CURATOR)?.clone()))
}

async fn pending(State(state): State<Arc<AppState>>, headers: HeaderMap) -> ApiResult<Json<serde_json::Value>> {
    state.require_curator(&headers)?;
    let store = state.read();
    let queue = store.pending_queue();
    Ok(Json(json!({ "total": queue.len(), "entries": queue })))
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<CorpusStats> {
    Json(state.read().stats())
}

#[derive(Debug, Deserialize)]
struct LoginBody {
    credential: String,
}

async fn login(
    State(state): State<Arc<AppState>>,
    body: Result<Json<LoginBody>, JsonRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let Json(body) = body?;
    let Some(expected) = state.config.credential.as_deref() else {
        return Err(ApiError::Unauthorized);
    };
    if !constant_time_eq(expected.as_bytes(), body.credential.as_bytes()) {
        return Err(ApiError::Unauthorized);
    }
    let token = uuid::Uuid::new_v4().simple().to_string();
    let ttl = state.config.token_ttl_secs;
    state
        .sessions
        .lock()
        .unwrap_or_else(|p| p.into_inner())
        .insert(token.clone(), Instant::now() + Duration::from_secs(ttl));
    Ok(Json(json!({ "token": token, "expires_in": ttl })))
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

async fn fallback() -> ApiError {
    ApiError::NotFound("no such endpoint".into())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/similes", get(list_similes).post(add_simile))
        .route("/similes/search", get(search_similes))
        .route("/similes/{id}", axum::routing::put(edit_simile))
        .route("/similes/{id}/approve", post(approve))
        .route("/similes/{id}/reject", post(reject))
        .route("/similes/{id}/reopen", post(reopen))
        .route("/pending", get(pending))
        .route("/stats", get(stats))
        .route("/login", post(login))
        .fallback(fallback)
        .with_state(state)
}

/// Binds `config.bind` and serves until the process is stopped.
pub async fn serve(store: CorpusStore, config: Config) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    if config.credential.is_none() {
        log::warn!("no curator credential configured; curator endpoints are disabled");
    }
    let app = router(AppState::new(store, config));
    axum::serve(listener, app.into_make_service_with_connect_info::<SocketAddr>()).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_window_slides() {
        let mut r = RateLimiter::default();
        let ip = IpAddr::V4(Ipv4Addr::LOCALHOST);
        let t0 = Instant::now();
        assert!(r.allow(ip, 2, t0));
        assert!(r.allow(ip, 2, t0));
        assert!(!r.allow(ip, 2, t0 + Duration::from_secs(10)));
        assert!(r.allow(IpAddr::V4(Ipv4Addr::BROADCAST), 2, t0));
        assert!(r.allow(ip, 2, t0 + RATE_WINDOW));
        assert!(r.allow(ip, 0, t0));
    }

    #[test]
    fn credential_comparison() {
        assert!(constant_time_eq(b"abc", b"abc"));
        assert!(!constant_time_eq(b"abc", b"abd"));
        assert!(!constant_time_eq(b"abc", b"ab"));
    }
}
