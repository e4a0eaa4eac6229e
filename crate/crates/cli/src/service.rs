//! HTTP/JSON session service.
//!
//! Routes:
//! * `POST /games` creates a session, `POST /games/{id}/move` plays one round
//!   (B's move, then A's answer), `GET /games/{id}` and
//!   `GET /games/{id}/export` return the transcript.
//! * `GET /spaces` lists the registry, `POST /spaces` uploads a space.
//! * `GET /trees/empirical?space=&rmax=&lmax=&bound=` builds an empirical tree.
//!
//! Bodies are canonical JSON; errors are `{"error": code, "detail": text}`.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use coarsebench_core::canon::to_canonical_string;
use coarsebench_core::covers::SolveMode;
use coarsebench_core::game::{a_respond, b_move, new_game, GameConfig, GameTranscript};
use coarsebench_core::spaces::{build_grid_space, FiniteMetricSpace, GridMetric, DEFAULT_POINT_CAP};
use coarsebench_core::trees::{empirical_dim_tree, EmpiricalTreeConfig, Variant};
use coarsebench_core::Error;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub detail: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            detail: detail.into(),
        }
    }

    fn bad_request(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid-input", detail)
    }

    fn not_found(code: &'static str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, detail)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::InvalidConfig(_) => (StatusCode::BAD_REQUEST, "invalid-config"),
            Error::Game(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid-move"),
            Error::Resource { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "resource"),
            Error::Unknown(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unknown"),
            Error::SpaceMismatch { .. } => (StatusCode::CONFLICT, "space-mismatch"),
            _ => (StatusCode::BAD_REQUEST, "invalid-input"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status, &json!({ "error": self.code, "detail": self.detail }))
    }
}

type ApiResult = Result<Response, ApiError>;

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    match to_canonical_string(value) {
        Ok(body) => (status, [(header::CONTENT_TYPE, "application/json")], body).into_response(),
        Err(e) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            [(header::CONTENT_TYPE, "application/json")],
            format!(r#"{{"detail":{:?},"error":"internal"}}"#, e.to_string()),
        )
            .into_response(),
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("body: {e}")))
}

type Session = Arc<tokio::sync::Mutex<GameTranscript>>;

#[derive(Default)]
struct Inner {
    spaces: RwLock<BTreeMap<String, Arc<FiniteMetricSpace>>>,
    sessions: Mutex<HashMap<u64, Session>>,
    next_id: AtomicU64,
}

/// Space registry and game sessions; cheap to clone.
#[derive(Clone, Default)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry preloaded with `[-8,8]`, `[-2,2]`, a point and `[-2,2]^2`.
    pub fn with_builtin_spaces() -> Self {
        let state = Self::new();
        for (n, s) in [(1, 8), (1, 2), (1, 0), (2, 2)] {
            let x = build_grid_space(n, 1, s, GridMetric::Taxicab, DEFAULT_POINT_CAP).expect("small grid");
            state.register(x).expect("fresh label");
        }
        state
    }

    /// Adds a space; `Ok(false)` when an identical space is already present.
    pub fn register(&self, space: FiniteMetricSpace) -> Result<bool, ApiError> {
        let mut spaces = self.0.spaces.write().expect("registry lock");
        if let Some(existing) = spaces.get(space.label()) {
            if **existing == space {
                return Ok(false);
            }
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "label-taken",
                format!("a different space is registered as `{}`", space.label()),
            ));
        }
        spaces.insert(space.label().to_string(), Arc::new(space));
        Ok(true)
    }

    pub fn space(&self, label: &str) -> Result<Arc<FiniteMetricSpace>, ApiError> {
        self.0
            .spaces
            .read()
            .expect("registry lock")
            .get(label)
            .cloned()
            .ok_or_else(|| ApiError::not_found("unknown-space", format!("no space `{label}`")))
    }

    fn session(&self, id: u64) -> Result<Session, ApiError> {
        self.0
            .sessions
            .lock()
            .expect("session lock")
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("unknown-game", format!("no game {id}")))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/move", post(move_game))
        .route("/games/{id}/export", get(export_game))
        .route("/spaces", get(list_spaces).post(upload_space))
        .route("/trees/empirical", get(empirical_tree))
        .fallback(|| async { ApiError::not_found("not-found", "no such route") })
        .with_state(state)
}

pub async fn serve(addr: &str, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))
}

#[derive(Deserialize)]
struct CreateGame {
    space: String,
    bound: u64,
    kcap: usize,
    rmax: u64,
    #[serde(default)]
    mode: Option<SolveMode>,
    #[serde(default)]
    budget_nodes: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
}

async fn create_game(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let req: CreateGame = parse_body(&body)?;
    let space = state.space(&req.space)?;
    let mut cfg = GameConfig::new(&space, req.bound, req.kcap, req.rmax);
    if let Some(m) = req.mode {
        cfg.mode = m;
    }
    if let Some(b) = req.budget_nodes {
        cfg.budget_nodes = b;
    }
    if let Some(s) = req.seed {
        cfg.seed = s;
    }
    let game = new_game(&space, cfg)?;
    let id = state.0.next_id.fetch_add(1, Ordering::SeqCst) + 1;
    let body = json!({ "id": id, "state": &game });
    state
        .0
        .sessions
        .lock()
        .expect("session lock")
        .insert(id, Arc::new(tokio::sync::Mutex::new(game)));
    Ok(json_response(StatusCode::CREATED, &body))
}

async fn get_game(State(state): State<AppState>, Path(id): Path<u64>) -> ApiResult {
    let session = state.session(id)?;
    let game = session.lock().await;
    Ok(json_response(StatusCode::OK, &*game))
}

#[derive(Deserialize)]
struct Move {
    r: u64,
}

async fn move_game(State(state): State<AppState>, Path(id): Path<u64>, body: Bytes) -> ApiResult {
    let session = state.session(id)?;
    let mv: Move = parse_body(&body)?;
    let mut game = session.lock().await;
    if game.is_over() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "game-ended",
            format!("game {id} has ended ({})", json!(game.status)),
        ));
    }
    let space = state.space(&game.config.space)?;
    let mut next = game.clone();
    let next = blocking(move || -> Result<GameTranscript, Error> {
        b_move(&mut next, mv.r)?;
        a_respond(&mut next, &space)?;
        Ok(next)
    })
    .await??;
    *game = next;
    let round = game.rounds.last().expect("a round was played");
    let body = json!({
        "id": id,
        "k": round.k,
        "cover": round.cover,
        "status": game.status,
        "stabilization_round": game.stabilization_round,
        "state": &*game,
    });
    Ok(json_response(StatusCode::OK, &body))
}

async fn export_game(State(state): State<AppState>, Path(id): Path<u64>) -> ApiResult {
    let session = state.session(id)?;
    let game = session.lock().await.clone();
    let space = state.space(&game.config.space)?;
    let body = json!({ "space": &*space, "transcript": game });
    let mut response = json_response(StatusCode::OK, &body);
    let disposition = format!("attachment; filename=\"game-{id}.json\"");
    if let Ok(v) = disposition.parse() {
        response.headers_mut().insert(header::CONTENT_DISPOSITION, v);
    }
    Ok(response)
}

async fn list_spaces(State(state): State<AppState>) -> ApiResult {
    let spaces = state.0.spaces.read().expect("registry lock");
    let list: Vec<_> = spaces
        .values()
        .map(|x| {
            let metric = match x.lattice_metric() {
                Some(GridMetric::Taxicab) => "taxicab",
                Some(GridMetric::Chebyshev) => "chebyshev",
                None => "matrix",
            };
            json!({ "label": x.label(), "points": x.len(), "dim": x.dim(), "metric": metric })
        })
        .collect();
    Ok(json_response(StatusCode::OK, &list))
}

async fn upload_space(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let space: FiniteMetricSpace = parse_body(&body)?;
    let label = space.label().to_string();
    let points = space.len();
    let created = state.register(space)?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok(json_response(status, &json!({ "label": label, "points": points })))
}

fn query_param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> Result<T, ApiError> {
    let raw = q
        .get(key)
        .ok_or_else(|| ApiError::bad_request(format!("missing query parameter `{key}`")))?;
    raw.parse()
        .map_err(|_| ApiError::bad_request(format!("bad value for `{key}`: {raw}")))
}

async fn empirical_tree(State(state): State<AppState>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let label: String = query_param(&q, "space")?;
    let space = state.space(&label)?;
    let rmax: u64 = query_param(&q, "rmax")?;
    let lmax: usize = query_param(&q, "lmax")?;
    let bound: u64 = query_param(&q, "bound")?;
    let variant = match q.get("variant").map(String::as_str) {
        None | Some("any") => Variant::Any,
        Some("nondecreasing") => Variant::Nondecreasing,
        Some("strictly-increasing") => Variant::StrictlyIncreasing,
        Some(other) => return Err(ApiError::bad_request(format!("unknown variant `{other}`"))),
    };
    let mut cfg = EmpiricalTreeConfig::new(rmax, lmax, bound, variant);
    match q.get("mode").map(String::as_str) {
        None | Some("exact") => {}
        Some("heuristic") => cfg.mode = SolveMode::Heuristic,
        Some(other) => return Err(ApiError::bad_request(format!("unknown mode `{other}`"))),
    }
    if q.contains_key("budget_nodes") {
        cfg.budget_nodes = query_param(&q, "budget_nodes")?;
    }
    let tree = blocking(move || empirical_dim_tree(&space, &cfg)).await??;
    Ok(json_response(StatusCode::OK, &tree))
}
