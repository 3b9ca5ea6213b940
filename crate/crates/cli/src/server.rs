//! HTTP/JSON front end for the game engine.
//!
//! Games live in memory. Each game sits behind its own `RwLock`, so moves on
//! one game are linearised while reads and requests for other games proceed
//! in parallel. Locks are never held across an `.await`.
//!
//! | Method | Path                       | Success                 |
//! |--------|----------------------------|-------------------------|
//! | POST   | `/games`                   | 201 `{id, snapshot}`    |
//! | GET    | `/games/{id}`              | 200 snapshot            |
//! | POST   | `/games/{id}/moves`        | 200 snapshot            |
//! | GET    | `/games/{id}/suggestion`   | 200 `{move, rationale}` |
//! | POST   | `/games/{id}/annotations`  | 201 `{tick, text}`      |
//! | GET    | `/games/{id}/savefile`     | 200 `text/plain`        |

use std::collections::HashMap;
use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use decodoku_core::game::{GameConfig, GameError, GameState, Mode, Move, Status, Target, DEFAULT_WARMUP};
use decodoku_core::pairrank::{PairFeatures, RankOptions};
use decodoku_core::savefile;
use decodoku_core::{LatticeSpec, NoiseSpec, Plaquette};
use serde::{Deserialize, Serialize};

/// Environment variable holding the bind address, e.g. `0.0.0.0:8080`.
pub const ADDR_ENV: &str = "DECODOKU_ADDR";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

type SharedGame = Arc<RwLock<GameState>>;

#[derive(Default)]
pub struct AppState {
    games: RwLock<HashMap<u64, SharedGame>>,
    next_id: AtomicU64,
    /// Finished games are written here as `game-<id>.save`.
    save_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(save_dir: Option<PathBuf>) -> Self {
        Self {
            save_dir,
            ..Self::default()
        }
    }

    fn insert(&self, game: GameState) -> u64 {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        self.games
            .write()
            .expect("game table poisoned")
            .insert(id, Arc::new(RwLock::new(game)));
        id
    }

    fn game(&self, id: u64) -> Result<SharedGame, ApiError> {
        self.games
            .read()
            .expect("game table poisoned")
            .get(&id)
            .cloned()
            .ok_or(ApiError::NotFound(id))
    }

    fn write_through(&self, id: u64, g: &GameState) {
        if let Some(dir) = &self.save_dir {
            let path = dir.join(format!("game-{id}.save"));
            if let Err(e) = fs::write(&path, savefile::serialize(g)) {
                eprintln!("warning: could not write {}: {e}", path.display());
            }
        }
    }
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(u64),
    Conflict(String),
    Unprocessable(String),
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, format!("no game with id {id}")),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
        };
        (status, Json(ErrorBody { error })).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::BadRequest(r.body_text())
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::GameOver => ApiError::Conflict(e.to_string()),
            GameError::Config(_) => ApiError::BadRequest(e.to_string()),
            _ => ApiError::Unprocessable(e.to_string()),
        }
    }
}

/// Body of `POST /games`. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewGameRequest {
    pub mode: Option<Mode>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub d: Option<u32>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub spawn_period: Option<u32>,
    pub warmup: Option<usize>,
}

impl NewGameRequest {
    pub fn into_config(self) -> GameConfig {
        let defaults = LatticeSpec::default();
        GameConfig {
            // Dimensions are checked by `GameConfig::validate`.
            spec: LatticeSpec {
                width: self.width.unwrap_or(defaults.width),
                height: self.height.unwrap_or(defaults.height),
                d: self.d.unwrap_or(defaults.d),
            },
            noise: NoiseSpec {
                p: self.p.unwrap_or(0.0),
                seed: self.seed.unwrap_or(0),
                spawn_period: self.spawn_period.unwrap_or(1),
                ..NoiseSpec::default()
            },
            mode: self.mode.unwrap_or(Mode::Dynamic),
            warmup: self.warmup.unwrap_or(DEFAULT_WARMUP),
        }
    }
}

/// Move target on the wire: a plaquette object or `"OFF:left"` / `"OFF:right"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireTarget {
    Plaquette(Plaquette),
    Off(OffBoard),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OffBoard {
    #[serde(rename = "OFF:left")]
    Left,
    #[serde(rename = "OFF:right")]
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireMove {
    pub from: Plaquette,
    pub to: WireTarget,
}

impl From<WireMove> for Move {
    fn from(m: WireMove) -> Self {
        let to = match m.to {
            WireTarget::Plaquette(p) => Target::Plaquette(p),
            WireTarget::Off(OffBoard::Left) => Target::OffLeft,
            WireTarget::Off(OffBoard::Right) => Target::OffRight,
        };
        Move::new(m.from, to)
    }
}

impl From<Move> for WireMove {
    fn from(m: Move) -> Self {
        let to = match m.to {
            Target::Plaquette(p) => WireTarget::Plaquette(p),
            Target::OffLeft => WireTarget::Off(OffBoard::Left),
            Target::OffRight => WireTarget::Off(OffBoard::Right),
        };
        WireMove { from: m.from, to }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectView {
    pub row: usize,
    pub col: usize,
    pub value: u32,
    pub cluster: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub id: u64,
    pub width: usize,
    pub height: usize,
    pub d: u32,
    pub defects: Vec<DefectView>,
    pub score: u64,
    pub moves_made: u64,
    pub status: Status,
    pub mode: Mode,
}

impl StateSnapshot {
    pub fn of(id: u64, g: &GameState) -> Self {
        let spec = g.spec();
        let defects = g
            .tracker
            .clusters(&g.syndrome)
            .into_iter()
            .flat_map(|c| {
                c.members.into_iter().map(move |(p, value)| DefectView {
                    row: p.row,
                    col: p.col,
                    value,
                    cluster: c.id,
                })
            })
            .collect::<Vec<_>>();
        let mut defects = defects;
        defects.sort_by_key(|v| (v.row, v.col));
        Self {
            id,
            width: spec.width,
            height: spec.height,
            d: spec.d,
            defects,
            score: g.score,
            moves_made: g.moves_made,
            status: g.status,
            mode: g.mode(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub id: u64,
    pub snapshot: StateSnapshot,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Suggestion {
    #[serde(rename = "move")]
    pub mv: WireMove,
    pub rationale: Option<PairFeatures>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationRequest {
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationView {
    pub tick: u64,
    pub text: String,
}

async fn create_game(
    State(app): State<Arc<AppState>>,
    body: Result<Json<NewGameRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let Json(req) = body?;
    let game = GameState::new(req.into_config())?;
    let id = app.insert(game.clone());
    let snapshot = StateSnapshot::of(id, &game);
    Ok((StatusCode::CREATED, Json(Created { id, snapshot })))
}

async fn get_game(
    State(app): State<Arc<AppState>>,
    Path(id): Path<u64>,
) -> Result<Json<StateSnapshot>, ApiError> {
    let game = app.game(id)?;
    let g = game.read().expect("game poisoned");
    Ok(Json(StateSnapshot::of(id, &g)))
}

async fn post_move(
    State(app): State<Arc<AppState>>,
    Path(id): Path<u64>,
    body: Result<Json<WireMove>, JsonRejection>,
) -> Result<Json<StateSnapshot>, ApiError> {
    let game = app.game(id)?;
    let Json(mv) = body?;
    let mut g = game.write().expect("game poisoned");
    let was_running = g.status == Status::Running;
    g.apply_player_move(mv.into())?;
    if was_running && g.status == Status::Over {
        app.write_through(id, &g);
    }
    Ok(Json(StateSnapshot::of(id, &g)))
}

async fn get_suggestion(State(app): State<Arc<AppState>>, Path(id): Path<u64>) -> Result<Response, ApiError> {
    let game = app.game(id)?;
    let g = game.read().expect("game poisoned");
    if g.status == Status::Over {
        return Err(ApiError::Conflict(GameError::GameOver.to_string()));
    }
    Ok(match g.suggest_move(RankOptions::default()) {
        None => StatusCode::NO_CONTENT.into_response(),
        Some(dec) => Json(Suggestion {
            mv: dec.mv.into(),
            rationale: dec.rationale,
        })
        .into_response(),
    })
}

async fn post_annotation(
    State(app): State<Arc<AppState>>,
    Path(id): Path<u64>,
    body: Result<Json<AnnotationRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<AnnotationView>), ApiError> {
    let game = app.game(id)?;
    let Json(req) = body?;
    if req.text.trim().is_empty() {
        return Err(ApiError::Unprocessable("annotation text is empty".into()));
    }
    let mut g = game.write().expect("game poisoned");
    g.annotate(&req.text);
    let a = g.annotations.last().expect("just pushed");
    Ok((
        StatusCode::CREATED,
        Json(AnnotationView {
            tick: a.tick,
            text: a.text.clone(),
        }),
    ))
}

async fn get_savefile(State(app): State<Arc<AppState>>, Path(id): Path<u64>) -> Result<Response, ApiError> {
    let game = app.game(id)?;
    let text = savefile::serialize(&game.read().expect("game poisoned"));
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/moves", post(post_move))
        .route("/games/{id}/suggestion", get(get_suggestion))
        .route("/games/{id}/annotations", post(post_annotation))
        .route("/games/{id}/savefile", get(get_savefile))
        .with_state(state)
}

/// Bind address from [`ADDR_ENV`], falling back to [`DEFAULT_ADDR`].
pub fn bind_addr_from_env() -> anyhow::Result<SocketAddr> {
    let raw = std::env::var(ADDR_ENV).unwrap_or_else(|_| DEFAULT_ADDR.to_string());
    raw.parse()
        .map_err(|e| anyhow::anyhow!("{ADDR_ENV}={raw} is not a socket address: {e}"))
}

pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("decodoku listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
