//! HTTP/JSON facade over exploration sessions.
//!
//! | route | effect |
//! |---|---|
//! | `POST /sessions?threshold=N` | upload an OCEL document, initialize |
//! | `GET /sessions/{sid}/model` | current model graph |
//! | `GET /sessions/{sid}/abstractions` | available, redoable, history |
//! | `POST /sessions/{sid}/apply` | apply an abstraction reference |
//! | `POST /sessions/{sid}/redo` | retract `{"oid": ...}` |
//! | `GET /sessions/{sid}/export` | current augmented log |
//!
//! Anything else is served from the static directory, if one is set.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use inexa_core::abstraction::AbstractionRef;
use inexa_core::discovery::DiscoveryError;
use inexa_core::ocel::{parse_log, LogFormat, ObjectId};
use inexa_core::ocpn::ModelGraphPayload;
use inexa_core::session::{HistoryEntry, Offer, Session, SessionConfig, SessionError, DEFAULT_SEED, DEFAULT_THRESHOLD};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub default_threshold: usize,
    pub seed: u64,
    pub static_dir: Option<PathBuf>,
    /// Where sessions are exported on shutdown.
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            default_threshold: DEFAULT_THRESHOLD,
            seed: DEFAULT_SEED,
            static_dir: None,
            snapshot_dir: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SessionHandle {
    pub sid: String,
    pub created_at: DateTime<Utc>,
    pub threshold: usize,
}

struct Entry {
    handle: SessionHandle,
    session: Mutex<Session>,
}

pub struct AppState {
    config: ServiceConfig,
    sessions: RwLock<BTreeMap<String, Arc<Entry>>>,
    counter: Mutex<u64>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Arc<Self> {
        Arc::new(AppState {
            config,
            sessions: RwLock::new(BTreeMap::new()),
            counter: Mutex::new(0),
        })
    }

    fn lookup(&self, sid: &str) -> Result<Arc<Entry>, ApiError> {
        self.sessions
            .read()
            .expect("registry lock")
            .get(sid)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {sid}")))
    }

    /// Writes every session's export to `dir/<sid>.json`.
    pub fn snapshot(&self, dir: &std::path::Path) -> std::io::Result<usize> {
        std::fs::create_dir_all(dir)?;
        let sessions = self.sessions.read().expect("registry lock");
        for (sid, e) in sessions.iter() {
            let bytes = e.session.lock().expect("session lock").export();
            std::fs::write(dir.join(format!("{sid}.json")), bytes)?;
        }
        Ok(sessions.len())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.into() }),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::Log(_) => StatusCode::BAD_REQUEST,
            SessionError::NotAvailable(_) => StatusCode::CONFLICT,
            SessionError::NotRedoable(_) | SessionError::Discovery(_) | SessionError::History(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
        };
        let mut body = json!({ "error": e.to_string() });
        if let SessionError::Discovery(DiscoveryError::Unfit { diagnostics }) = &e {
            body["diagnostics"] = diagnostics
                .iter()
                .map(|(ev, msg)| json!({ "event": ev, "message": msg }))
                .collect();
        }
        ApiError { status, body }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Serialize)]
struct Lists {
    available: Vec<Offer>,
    redoable: Vec<Offer>,
    history: Vec<HistoryEntry>,
}

fn lists(s: &Session) -> Lists {
    Lists {
        available: s.available(),
        redoable: s.redoable(),
        history: s.history(),
    }
}

#[derive(Serialize)]
struct StateBody {
    model: ModelGraphPayload,
    #[serde(flatten)]
    lists: Lists,
}

fn state_body(s: &Session) -> StateBody {
    StateBody {
        model: ModelGraphPayload::from_net(s.net()),
        lists: lists(s),
    }
}

#[derive(Deserialize)]
struct CreateQuery {
    threshold: Option<usize>,
}

#[derive(Serialize)]
struct Created {
    #[serde(flatten)]
    handle: SessionHandle,
    #[serde(flatten)]
    state: StateBody,
    warnings: Vec<String>,
}

async fn create(
    State(app): State<Arc<AppState>>,
    Query(q): Query<CreateQuery>,
    body: Bytes,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let threshold = q.threshold.unwrap_or(app.config.default_threshold);
    let seed = app.config.seed;
    let session = tokio::task::spawn_blocking(move || {
        let log = parse_log(&body, LogFormat::OcelJson).map_err(SessionError::from)?;
        Session::initialize(log, SessionConfig::with_threshold(threshold).seed(seed))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let sid = {
        let mut c = app.counter.lock().expect("counter lock");
        *c += 1;
        format!("s{:04}", *c)
    };
    let handle = SessionHandle {
        sid: sid.clone(),
        created_at: Utc::now(),
        threshold,
    };
    let created = Created {
        handle: handle.clone(),
        state: state_body(&session),
        warnings: session.warnings().to_vec(),
    };
    log::info!("created session {sid}");
    app.sessions.write().expect("registry lock").insert(
        sid,
        Arc::new(Entry {
            handle,
            session: Mutex::new(session),
        }),
    );
    Ok((StatusCode::CREATED, Json(created)))
}

async fn model(State(app): State<Arc<AppState>>, Path(sid): Path<String>) -> Result<Json<ModelGraphPayload>, ApiError> {
    let e = app.lookup(&sid)?;
    let s = e.session.lock().expect("session lock");
    Ok(Json(ModelGraphPayload::from_net(s.net())))
}

async fn abstractions(State(app): State<Arc<AppState>>, Path(sid): Path<String>) -> Result<Response, ApiError> {
    let e = app.lookup(&sid)?;
    let s = e.session.lock().expect("session lock");
    Ok(Json(lists(&s)).into_response())
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))
}

#[derive(Serialize)]
struct Mutated {
    oid: ObjectId,
    #[serde(flatten)]
    state: StateBody,
}

async fn apply(State(app): State<Arc<AppState>>, Path(sid): Path<String>, body: Bytes) -> Result<Json<Mutated>, ApiError> {
    let e = app.lookup(&sid)?;
    let r: AbstractionRef = json_body(&body)?;
    let mut s = e.session.lock().expect("session lock");
    let oid = s.apply(&r)?;
    Ok(Json(Mutated {
        oid,
        state: state_body(&s),
    }))
}

#[derive(Deserialize)]
struct RedoBody {
    oid: ObjectId,
}

async fn redo(State(app): State<Arc<AppState>>, Path(sid): Path<String>, body: Bytes) -> Result<Json<Mutated>, ApiError> {
    let e = app.lookup(&sid)?;
    let RedoBody { oid } = json_body(&body)?;
    let mut s = e.session.lock().expect("session lock");
    s.redo(&oid)?;
    Ok(Json(Mutated {
        oid,
        state: state_body(&s),
    }))
}

async fn export(State(app): State<Arc<AppState>>, Path(sid): Path<String>) -> Result<Response, ApiError> {
    let e = app.lookup(&sid)?;
    let bytes = e.session.lock().expect("session lock").export();
    let name = format!("attachment; filename=\"{}.json\"", e.handle.sid);
    Ok((
        [(header::CONTENT_TYPE, "application/json".to_string()), (header::CONTENT_DISPOSITION, name)],
        bytes,
    )
        .into_response())
}

pub fn router(app: Arc<AppState>) -> Router {
    let static_dir = app.config.static_dir.clone();
    let r = Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{sid}/model", get(model))
        .route("/sessions/{sid}/abstractions", get(abstractions))
        .route("/sessions/{sid}/apply", post(apply))
        .route("/sessions/{sid}/redo", post(redo))
        .route("/sessions/{sid}/export", get(export))
        .with_state(app);
    match static_dir {
        Some(dir) => r.fallback_service(ServeDir::new(dir)),
        None => r,
    }
}

/// Serves until Ctrl-C, then snapshots the sessions if configured.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let app = AppState::new(config);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(dir) = &app.config.snapshot_dir {
        let n = app.snapshot(dir)?;
        log::info!("wrote {n} session snapshot(s) to {}", dir.display());
    }
    Ok(())
}
