//! Dynamic (arcade) and puzzle game engine.
//!
//! A move takes the whole charge of one defect and carries it across a
//! single qudit, either into an orthogonally adjacent plaquette or off an
//! absorbing side. In dynamic mode a fresh error spawns every
//! `spawn_period` moves (and immediately whenever the board is cleared), and
//! the game ends once more than half of the plaquettes hold defects. Puzzle
//! boards are generated once and never grow.

use std::fmt;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{MoveDestination, ProvenanceTracker};
use crate::lattice::{
    bordering_plaquettes, is_logically_trivial, CorrectionLedger, ErrorEvent, LatticeSpec, Plaquette,
    QuditId, SyndromeState,
};
use crate::noise::{generate_instance, sample_spawn, stream_rng, NoiseSpec};
use crate::pairrank::{select_action, Decision, RankOptions};

pub const DEFAULT_WARMUP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Dynamic,
    Puzzle,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Dynamic => "dynamic",
            Mode::Puzzle => "puzzle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Over,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Over => "over",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    Plaquette(Plaquette),
    OffLeft,
    OffRight,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Plaquette(p) => write!(f, "{p}"),
            Target::OffLeft => f.write_str("OFF:left"),
            Target::OffRight => f.write_str("OFF:right"),
        }
    }
}

/// One elementary move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub from: Plaquette,
    pub to: Target,
}

impl Move {
    pub fn new(from: Plaquette, to: Target) -> Self {
        Self { from, to }
    }

    pub fn is_boundary_push(&self) -> bool {
        !matches!(self.to, Target::Plaquette(_))
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MoveRecord {
    pub mv: Move,
    /// 1-based index of the move.
    pub tick: u64,
}

/// An error together with the tick after which it appeared (0 = opening board).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LoggedError {
    pub tick: u64,
    pub event: ErrorEvent,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Annotation {
    pub tick: u64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("game over")]
    GameOver,
    #[error("source {0} outside the grid")]
    OutOfBounds(Plaquette),
    #[error("empty source")]
    EmptySource,
    #[error("non-adjacent target")]
    NotAdjacent,
    #[error("boundary push requires an edge column")]
    NotOnBoundary,
    #[error("operation requires puzzle mode")]
    NotPuzzle,
}

/// A move sequence was rejected at position `index`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("move {index} rejected: {error}")]
pub struct MoveRejected {
    pub index: usize,
    pub error: GameError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub spec: LatticeSpec,
    pub noise: NoiseSpec,
    pub mode: Mode,
    /// Errors spawned before the first move in dynamic mode. Puzzle games
    /// normalise it to zero.
    pub warmup: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            spec: LatticeSpec::default(),
            noise: NoiseSpec::default(),
            mode: Mode::Dynamic,
            warmup: DEFAULT_WARMUP,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<(), GameError> {
        self.spec
            .validate()
            .map_err(|e| GameError::Config(e.to_string()))?;
        self.noise
            .validate(&self.spec)
            .map_err(|e| GameError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Solved,
    LogicalFailure,
    Incomplete,
}

/// Defect count above which a dynamic game is lost.
pub fn occupancy_limit(spec: &LatticeSpec) -> usize {
    spec.plaquette_count().div_ceil(2)
}

#[derive(Debug, Clone)]
pub struct GameState {
    pub config: GameConfig,
    pub syndrome: SyndromeState,
    pub tracker: ProvenanceTracker,
    pub ledger: CorrectionLedger,
    pub error_log: Vec<LoggedError>,
    pub move_log: Vec<MoveRecord>,
    pub annotations: Vec<Annotation>,
    pub moves_made: u64,
    pub status: Status,
    pub score: u64,
    rng: ChaCha8Rng,
}

// The spawn RNG is excluded: replayed games are compared on observable state.
impl PartialEq for GameState {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.syndrome == other.syndrome
            && self.tracker == other.tracker
            && self.ledger == other.ledger
            && self.error_log == other.error_log
            && self.move_log == other.move_log
            && self.annotations == other.annotations
            && self.moves_made == other.moves_made
            && self.status == other.status
            && self.score == other.score
    }
}

impl GameState {
    /// Empty board with no errors applied yet.
    pub(crate) fn blank(mut config: GameConfig) -> Result<Self, GameError> {
        config.validate()?;
        if config.mode == Mode::Puzzle {
            config.warmup = 0;
        }
        Ok(Self {
            syndrome: SyndromeState::new(config.spec),
            tracker: ProvenanceTracker::new(),
            ledger: CorrectionLedger::new(),
            error_log: Vec::new(),
            move_log: Vec::new(),
            annotations: Vec::new(),
            moves_made: 0,
            status: Status::Running,
            score: 0,
            rng: stream_rng(config.noise.seed, 0),
            config,
        })
    }

    pub fn new(config: GameConfig) -> Result<Self, GameError> {
        let mut g = Self::blank(config)?;
        match g.config.mode {
            Mode::Puzzle => {
                let events = generate_instance(&g.config.spec, &g.config.noise, &mut g.rng, 0);
                for e in events {
                    g.apply_error(e, 0).expect("generated errors are valid");
                }
            }
            Mode::Dynamic => {
                for _ in 0..g.config.warmup {
                    g.spawn();
                }
            }
        }
        Ok(g)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.config.spec
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn errors(&self) -> Vec<ErrorEvent> {
        self.error_log.iter().map(|l| l.event).collect()
    }

    pub(crate) fn apply_error(&mut self, event: ErrorEvent, tick: u64) -> Result<(), GameError> {
        let touched: Vec<Plaquette> = bordering_plaquettes(event.qudit, &self.config.spec)
            .map_err(|e| GameError::Config(e.to_string()))?
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        self.syndrome
            .apply_shift(event.qudit, event.magnitude)
            .map_err(|e| GameError::Config(e.to_string()))?;
        self.tracker.record_error(&touched);
        self.error_log.push(LoggedError { tick, event });
        Ok(())
    }

    fn spawn(&mut self) {
        let id = self.error_log.len() as u64;
        let e = sample_spawn(&self.config.spec, &self.config.noise, &mut self.rng, id);
        self.apply_error(e, self.moves_made)
            .expect("sampled errors are valid");
    }

    /// Consumes the draws that generated a puzzle's opening errors without
    /// applying them. Replay uses this to resynchronise the RNG.
    pub(crate) fn skip_opening_draws(&mut self) {
        generate_instance(&self.config.spec, &self.config.noise, &mut self.rng, 0);
    }

    /// Consumes the draws of one spawn without applying it.
    pub(crate) fn skip_spawn_draw(&mut self) {
        sample_spawn(&self.config.spec, &self.config.noise, &mut self.rng, 0);
    }

    /// Qudit and shift that realise `mv`, after legality checks.
    pub fn check_move(&self, mv: &Move) -> Result<(QuditId, u32), GameError> {
        if self.status == Status::Over {
            return Err(GameError::GameOver);
        }
        let spec = &self.config.spec;
        if !spec.contains(mv.from) {
            return Err(GameError::OutOfBounds(mv.from));
        }
        let value = self.syndrome.get(mv.from);
        if value == 0 {
            return Err(GameError::EmptySource);
        }
        match mv.to {
            Target::Plaquette(t) => spec
                .transfer_shift(mv.from, t, value)
                .ok_or(GameError::NotAdjacent),
            Target::OffLeft if mv.from.col == 0 => Ok((QuditId::horizontal(mv.from.row, 0), spec.d - value)),
            Target::OffRight if mv.from.col + 1 == spec.width => {
                Ok((QuditId::horizontal(mv.from.row, spec.width), value))
            }
            Target::OffLeft | Target::OffRight => Err(GameError::NotOnBoundary),
        }
    }

    /// Applies a move without spawning or checking for game over.
    pub(crate) fn apply_move_only(&mut self, mv: Move) -> Result<(), GameError> {
        let (q, k) = self.check_move(&mv)?;
        let dest = match mv.to {
            Target::Plaquette(t) => MoveDestination::Plaquette(t),
            _ => MoveDestination::Boundary,
        };
        self.tracker
            .record_move(mv.from, dest, &self.syndrome)
            .map_err(|_| GameError::EmptySource)?;
        self.syndrome
            .apply_shift(q, k)
            .map_err(|e| GameError::Config(e.to_string()))?;
        self.ledger.add(q, k, self.config.spec.d);
        self.moves_made += 1;
        self.move_log.push(MoveRecord {
            mv,
            tick: self.moves_made,
        });
        self.score = self.moves_made;
        Ok(())
    }

    /// Applies a player move, then any due spawn, then the game-over check.
    pub fn apply_player_move(&mut self, mv: Move) -> Result<(), GameError> {
        self.apply_move_only(mv)?;
        if self.config.mode == Mode::Dynamic {
            if self
                .moves_made
                .is_multiple_of(self.config.noise.spawn_period as u64)
            {
                self.spawn();
            }
            // A cleared board would leave no legal move; errors keep coming.
            while self.syndrome.is_clear() {
                self.spawn();
            }
            self.update_status();
        }
        Ok(())
    }

    pub fn is_game_over(&self) -> bool {
        self.syndrome.defect_count() > occupancy_limit(&self.config.spec)
    }

    pub(crate) fn update_status(&mut self) {
        if self.status == Status::Running && self.is_game_over() {
            self.status = Status::Over;
            self.score = self.moves_made;
        }
    }

    /// Annotates the current tick. Newlines are folded into spaces.
    pub fn annotate(&mut self, text: &str) {
        let text = text.replace(['\r', '\n'], " ");
        self.annotations.push(Annotation {
            tick: self.moves_made,
            text,
        });
    }

    pub fn suggest_move(&self, opts: RankOptions) -> Option<Decision> {
        if self.status == Status::Over {
            return None;
        }
        select_action(&self.syndrome, &self.tracker, opts)
    }

    /// Every legal move in row-major source order.
    pub fn legal_moves(&self) -> Vec<Move> {
        if self.status == Status::Over {
            return Vec::new();
        }
        let spec = &self.config.spec;
        let mut out = Vec::new();
        for (p, _) in self.syndrome.defects() {
            out.extend(spec.neighbours(p).map(|n| Move::new(p, Target::Plaquette(n))));
            if p.col == 0 {
                out.push(Move::new(p, Target::OffLeft));
            }
            if p.col + 1 == spec.width {
                out.push(Move::new(p, Target::OffRight));
            }
        }
        out
    }

    /// Clear board plus zero flux across every cut.
    pub fn verdict(&self) -> Verdict {
        if !self.syndrome.is_clear() {
            Verdict::Incomplete
        } else if is_logically_trivial(&self.errors(), &self.ledger, &self.config.spec) {
            Verdict::Solved
        } else {
            Verdict::LogicalFailure
        }
    }

    /// Plays `moves` on a copy of this puzzle and judges the result.
    pub fn solve_puzzle_check(&self, moves: &[Move]) -> Result<Verdict, MoveRejected> {
        if self.config.mode != Mode::Puzzle {
            return Err(MoveRejected {
                index: 0,
                error: GameError::NotPuzzle,
            });
        }
        let mut g = self.clone();
        for (index, &mv) in moves.iter().enumerate() {
            g.apply_player_move(mv)
                .map_err(|error| MoveRejected { index, error })?;
        }
        Ok(g.verdict())
    }
}
