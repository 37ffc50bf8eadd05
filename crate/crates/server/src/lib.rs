// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Read-only JSON query service over a loaded corpus store.
//!
//! Endpoints (all `GET`):
//!
//! * `/terms?prefix=`: vocabulary with corpus-wide totals;
//! * `/neighbors?term=&alpha=&s=&y1=&y2=`: one neighborhood, plus `dual_alpha`;
//! * `/fields?alpha=&s=&k=&y1=&y2=[&edge_rule=&growth_basis=&previous=]`: the
//!   field set, same body as the CLI's `fields.json`;
//! * `/map?...[&min=&max=&log_base=]`: the macro map, same body as `map.json`;
//! * `/healthz`: store fingerprint.
//!
//! Field and map results are computed on demand and kept in an LRU cache keyed
//! by the full parameter tuple. A computation that outlives the soft deadline
//! answers `202` with `Retry-After`; the result lands in the cache when done.

use std::collections::{HashMap, HashSet};
use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use lru::LruCache;
use paramap::cliques::DEFAULT_CLIQUE_BUDGET;
use paramap::corpus::{CorpusStore, TimeWindow};
use paramap::macromap::SizeFilter;
use paramap::pipeline::{neighbors_payload, run_macro, run_meso, FieldSet, MacroConfig, MesoConfig};
use paramap::proximity::ProximityParams;
use paramap::{EdgeRule, Error, GrowthBasis, PreviousWindow};
use serde::Serialize;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

pub const CACHE_HEADER: &str = "x-cache";

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot load store: {0}")]
    Store(#[source] paramap::Error),
    #[error("cannot load precomputed results: {0}")]
    Preload(#[source] paramap::Error),
    #[error("invalid CORS origin \"{0}\"")]
    Cors(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub bind: SocketAddr,
    pub store_path: PathBuf,
    /// Precomputed `fields.json` to seed the cache with.
    pub fields_path: Option<PathBuf>,
    /// Precomputed `map.json` built from `fields_path`.
    pub map_path: Option<PathBuf>,
    pub cors_allowlist: Vec<String>,
    pub cache_capacity: usize,
    pub soft_deadline: Duration,
    pub static_dir: Option<PathBuf>,
    pub clique_budget: usize,
}

impl ServerConfig {
    pub fn new(bind: SocketAddr, store_path: PathBuf) -> Self {
        ServerConfig {
            bind,
            store_path,
            fields_path: None,
            map_path: None,
            cors_allowlist: Vec::new(),
            cache_capacity: 64,
            soft_deadline: Duration::from_secs(10),
            static_dir: None,
            clique_budget: DEFAULT_CLIQUE_BUDGET,
        }
    }
}

pub struct AppState {
    store: Arc<CorpusStore>,
    fingerprint: String,
    cache: Mutex<LruCache<String, Arc<String>>>,
    pending: Mutex<HashSet<String>>,
    soft_deadline: Duration,
    clique_budget: usize,
}

impl AppState {
    pub fn new(store: CorpusStore, cache_capacity: usize, soft_deadline: Duration) -> Self {
        let capacity = NonZeroUsize::new(cache_capacity.max(1)).expect("non-zero");
        AppState {
            fingerprint: store.fingerprint(),
            store: Arc::new(store),
            cache: Mutex::new(LruCache::new(capacity)),
            pending: Mutex::new(HashSet::new()),
            soft_deadline,
            clique_budget: DEFAULT_CLIQUE_BUDGET,
        }
    }

    pub fn with_clique_budget(mut self, budget: usize) -> Self {
        self.clique_budget = budget;
        self
    }

    pub fn store(&self) -> &CorpusStore {
        &self.store
    }

    /// Seeds the cache with a precomputed field set and, optionally, the map
    /// built from it.
    pub fn preload(&self, fields_json: &str, map_json: Option<&str>) -> paramap::Result<()> {
        let set = FieldSet::from_json(fields_json)?;
        let cfg = set.config;
        // re-serialize so the cached body matches a fresh computation byte for byte
        let (_, fields) = set.resolve(&self.store)?;
        let body = FieldSet::new(cfg, &fields).to_json()?;
        let mut cache = self.cache.lock().expect("cache lock");
        cache.put(fields_key(&cfg), Arc::new(body));
        if let Some(map_json) = map_json {
            let map: paramap::MacroMap = serde_json::from_str(map_json)?;
            if map.window != cfg.window {
                return Err(Error::InvalidParams(format!(
                    "map window {} does not match field window {}",
                    map.window, cfg.window
                )));
            }
            let macro_cfg = MacroConfig {
                filter: map.filter,
                log_base: map.log_base,
            };
            cache.put(map_key(&cfg, &macro_cfg), Arc::new(map.to_json()?));
        }
        Ok(())
    }
}

fn fields_key(c: &MesoConfig) -> String {
    format!(
        "fields|{}|{}|{}|{}|{}|{}|{}|{}",
        c.window, c.alpha, c.threshold, c.k, c.edge_rule, c.growth_basis, prev_name(c.previous), c.clique_budget
    )
}

fn map_key(c: &MesoConfig, m: &MacroConfig) -> String {
    format!(
        "map|{}|{}:{}|{}",
        fields_key(c),
        m.filter.min_terms,
        m.filter.max_terms,
        m.log_base
    )
}

fn prev_name(p: PreviousWindow) -> &'static str {
    match p {
        PreviousWindow::Adjacent => "adjacent",
        PreviousWindow::SharedBoundary => "shared_boundary",
    }
}

#[derive(Serialize)]
struct ErrorBody {
    status: u16,
    error: String,
}

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
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownTerm(_) | Error::UndefinedTerm { .. } => StatusCode::NOT_FOUND,
            Error::InvalidParams(_) | Error::Range { .. } | Error::DegenerateWindow(_) | Error::EmptyCorpus => {
                StatusCode::BAD_REQUEST
            }
            Error::Budget { .. } => StatusCode::SERVICE_UNAVAILABLE,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            status: self.status.as_u16(),
            error: self.message,
        };
        json_response(self.status, serde_json::to_string(&body).expect("error serializes"))
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

type Params = HashMap<String, String>;

fn param<T: std::str::FromStr>(q: &Params, name: &str) -> Result<Option<T>, ApiError> {
    match q.get(name) {
        None => Ok(None),
        Some(raw) if raw.is_empty() => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| ApiError::bad_request(format!("invalid {name} \"{raw}\""))),
    }
}

fn window(store: &CorpusStore, q: &Params) -> Result<TimeWindow, ApiError> {
    let (first, last) = store.year_range().ok_or(Error::EmptyCorpus)?;
    let y1 = param(q, "y1")?.unwrap_or(first);
    let y2 = param(q, "y2")?.unwrap_or(last);
    let w = TimeWindow::new(y1, y2)?;
    store.check_window(w)?;
    Ok(w)
}

fn meso_config(state: &AppState, q: &Params) -> Result<MesoConfig, ApiError> {
    let w = window(&state.store, q)?;
    let mut cfg = MesoConfig::new(w, param(q, "alpha")?.unwrap_or(1.0), param(q, "s")?.unwrap_or(0.1));
    cfg.k = param(q, "k")?.unwrap_or(3);
    cfg.edge_rule = param::<String>(q, "edge_rule")?
        .map(|s| s.parse::<EdgeRule>())
        .transpose()?
        .unwrap_or_default();
    cfg.growth_basis = param::<String>(q, "growth_basis")?
        .map(|s| s.parse::<GrowthBasis>())
        .transpose()?
        .unwrap_or_default();
    cfg.previous = match param::<String>(q, "previous")?.as_deref() {
        None | Some("adjacent") => PreviousWindow::Adjacent,
        Some("shared_boundary") => PreviousWindow::SharedBoundary,
        Some(other) => return Err(ApiError::bad_request(format!("invalid previous \"{other}\""))),
    };
    cfg.clique_budget = state.clique_budget;
    cfg.proximity_params()?;
    cfg.cpm_params()?;
    Ok(cfg)
}

fn macro_config(q: &Params) -> Result<MacroConfig, ApiError> {
    let d = MacroConfig::default();
    let filter = SizeFilter::new(
        param(q, "min")?.unwrap_or(d.filter.min_terms),
        param(q, "max")?.unwrap_or(d.filter.max_terms),
    )?;
    Ok(MacroConfig {
        filter,
        log_base: param(q, "log_base")?.unwrap_or(d.log_base),
    })
}

#[derive(Serialize)]
struct TermEntry<'a> {
    label: &'a str,
    total_occurrences: u64,
}

async fn terms(State(state): State<Arc<AppState>>, Query(q): Query<Params>) -> Result<Response, ApiError> {
    let store = &state.store;
    let prefix = paramap::corpus::normalize_label(q.get("prefix").map(String::as_str).unwrap_or(""));
    let mut entries: Vec<TermEntry> = match store.year_range() {
        None => Vec::new(),
        Some((first, last)) => {
            let counts = store.window_counts(TimeWindow::new(first, last)?)?;
            store
                .terms()
                .filter(|&t| store.label(t).starts_with(&prefix))
                .map(|t| TermEntry {
                    label: store.label(t),
                    total_occurrences: counts.occurrence(t),
                })
                .collect()
        }
    };
    entries.sort_by(|a, b| b.total_occurrences.cmp(&a.total_occurrences).then(a.label.cmp(b.label)));
    Ok(json_response(StatusCode::OK, serde_json::to_string(&entries).expect("terms serialize")))
}

async fn neighbors(State(state): State<Arc<AppState>>, Query(q): Query<Params>) -> Result<Response, ApiError> {
    let store = &state.store;
    let label = q
        .get("term")
        .filter(|t| !t.is_empty())
        .ok_or_else(|| ApiError::bad_request("missing term"))?;
    let w = window(store, &q)?;
    let params = ProximityParams::new(param(&q, "alpha")?.unwrap_or(1.0), param(&q, "s")?.unwrap_or(0.0), w)?;
    let term = store.require_term(label)?;
    let mut payload = neighbors_payload(store, term, params)?;
    payload.dual_alpha = Some(1.0 / params.alpha);
    Ok(json_response(StatusCode::OK, serde_json::to_string(&payload).expect("payload serializes")))
}

async fn cached<F>(state: Arc<AppState>, key: String, compute: F) -> Response
where
    F: FnOnce(&CorpusStore) -> paramap::Result<String> + Send + 'static,
{
    if let Some(body) = state.cache.lock().expect("cache lock").get(&key).cloned() {
        return with_cache_header(json_response(StatusCode::OK, body.as_ref().clone()), "hit");
    }
    if !state.pending.lock().expect("pending lock").insert(key.clone()) {
        return accepted();
    }
    let worker_state = state.clone();
    let worker_key = key.clone();
    let handle = tokio::task::spawn_blocking(move || {
        let result = compute(&worker_state.store).map(Arc::new);
        if let Ok(body) = &result {
            worker_state
                .cache
                .lock()
                .expect("cache lock")
                .put(worker_key.clone(), body.clone());
        }
        worker_state.pending.lock().expect("pending lock").remove(&worker_key);
        result
    });
    match tokio::time::timeout(state.soft_deadline, handle).await {
        Ok(Ok(Ok(body))) => with_cache_header(json_response(StatusCode::OK, body.as_ref().clone()), "miss"),
        Ok(Ok(Err(e))) => ApiError::from(e).into_response(),
        Ok(Err(join)) => ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: format!("computation failed: {join}"),
        }
        .into_response(),
        Err(_) => {
            log::info!("{key} still computing after {:?}", state.soft_deadline);
            accepted()
        }
    }
}

fn accepted() -> Response {
    let mut r = json_response(
        StatusCode::ACCEPTED,
        r#"{"status":202,"error":"computation in progress, retry later"}"#.to_string(),
    );
    r.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from_static("1"));
    r
}

fn with_cache_header(mut r: Response, value: &'static str) -> Response {
    r.headers_mut().insert(CACHE_HEADER, HeaderValue::from_static(value));
    r
}

async fn fields(State(state): State<Arc<AppState>>, Query(q): Query<Params>) -> Result<Response, ApiError> {
    let cfg = meso_config(&state, &q)?;
    Ok(cached(state, fields_key(&cfg), move |store| {
        let result = run_meso(store, &cfg)?;
        FieldSet::new(cfg, &result.fields).to_json()
    })
    .await)
}

async fn map(State(state): State<Arc<AppState>>, Query(q): Query<Params>) -> Result<Response, ApiError> {
    let cfg = meso_config(&state, &q)?;
    let macro_cfg = macro_config(&q)?;
    Ok(cached(state, map_key(&cfg, &macro_cfg), move |store| {
        let result = run_meso(store, &cfg)?;
        run_macro(store, &cfg, &result.fields, &macro_cfg)?.to_json()
    })
    .await)
}

async fn healthz(State(state): State<Arc<AppState>>) -> Response {
    json_response(
        StatusCode::OK,
        serde_json::json!({"status": "ok", "fingerprint": state.fingerprint}).to_string(),
    )
}

/// All API routes over `state`.
pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/terms", get(terms))
        .route("/neighbors", get(neighbors))
        .route("/fields", get(fields))
        .route("/map", get(map))
        .route("/healthz", get(healthz))
        .with_state(state)
}

fn cors_layer(origins: &[String]) -> Result<CorsLayer, ServerError> {
    let values = origins
        .iter()
        .map(|o| HeaderValue::from_str(o).map_err(|_| ServerError::Cors(o.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorsLayer::new()
        .allow_origin(AllowOrigin::list(values))
        .allow_methods([Method::GET]))
}

/// Router with CORS and optional static assets, built from `config`.
pub fn build_app(config: &ServerConfig) -> Result<Router, ServerError> {
    let store = CorpusStore::load(&config.store_path).map_err(ServerError::Store)?;
    let state = AppState::new(store, config.cache_capacity, config.soft_deadline)
        .with_clique_budget(config.clique_budget);
    if let Some(fields_path) = &config.fields_path {
        let fields_json = std::fs::read_to_string(fields_path)?;
        let map_json = config.map_path.as_ref().map(std::fs::read_to_string).transpose()?;
        state
            .preload(&fields_json, map_json.as_deref())
            .map_err(ServerError::Preload)?;
    }
    let mut app = router(Arc::new(state));
    if let Some(dir) = &config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    if !config.cors_allowlist.is_empty() {
        app = app.layer(cors_layer(&config.cors_allowlist)?);
    }
    Ok(app)
}

/// Binds and serves until the process is stopped.
pub async fn serve(config: ServerConfig) -> Result<(), ServerError> {
    let app = build_app(&config)?;
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
