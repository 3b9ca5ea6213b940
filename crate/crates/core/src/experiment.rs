//! Seeded Monte Carlo campaigns.
//!
//! Every trial and every episode draws from its own RNG stream derived from
//! `(seed, index)`, so results do not depend on execution order and trials
//! can run in parallel. Rows are always emitted in index order.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameConfig, GameState, Mode, Status};
use crate::hdrg::hdrg_decode;
use crate::lattice::{is_logically_trivial, LatticeSpec, SyndromeState};
use crate::noise::{generate_instance, stream_rng, MagnitudeDist, NoiseSpec};
use crate::pairrank::RankOptions;
use crate::stats::{wilson_interval, Z95};

pub const LOGICAL_CSV_HEADER: &str = "p,trials,failures,rate";
pub const SURVIVAL_CSV_HEADER: &str = "episode,policy,moves_survived";
pub const DEFAULT_CAP: u64 = 10_000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("cannot write results: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoder {
    Hdrg,
}

impl FromStr for Decoder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hdrg" => Ok(Decoder::Hdrg),
            other => Err(format!("unknown decoder `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Pairrank,
    Random,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Pairrank => "pairrank",
            Policy::Random => "random",
        }
    }
}

impl FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pairrank" => Ok(Policy::Pairrank),
            "random" => Ok(Policy::Random),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalConfig {
    pub spec: LatticeSpec,
    pub ps: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub decoder: Decoder,
    pub magnitude_dist: MagnitudeDist,
}

impl LogicalConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.spec
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        if self.trials == 0 {
            return Err(ExperimentError::Config("trials must be at least 1".into()));
        }
        for &p in &self.ps {
            if !(0.0..=1.0).contains(&p) {
                return Err(ExperimentError::Config(format!("p = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalRow {
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
}

impl LogicalRow {
    pub fn wilson95(&self) -> (f64, f64) {
        wilson_interval(self.failures, self.trials, Z95)
    }
}

/// Stream index for trial `trial` of grid point `point`.
fn trial_stream(point: usize, trial: u64) -> u64 {
    ((point as u64) << 40) | trial
}

/// Decodes one random instance; `true` on logical failure.
pub fn logical_trial(spec: &LatticeSpec, noise: &NoiseSpec, stream: u64) -> bool {
    let mut rng = stream_rng(noise.seed, stream);
    let errors = generate_instance(spec, noise, &mut rng, 0);
    let mut syndrome = SyndromeState::from_errors(*spec, &errors).expect("generated errors are valid");
    let ledger = hdrg_decode(&syndrome);
    syndrome.apply_ledger(&ledger).expect("decoder shifts are valid");
    !syndrome.is_clear() || !is_logically_trivial(&errors, &ledger, spec)
}

pub fn run_logical_experiment(cfg: &LogicalConfig) -> Result<Vec<LogicalRow>, ExperimentError> {
    cfg.validate()?;
    Ok(cfg
        .ps
        .iter()
        .enumerate()
        .map(|(point, &p)| {
            let noise = NoiseSpec {
                p,
                magnitude_dist: cfg.magnitude_dist.clone(),
                spawn_period: 1,
                seed: cfg.seed,
            };
            let failures = (0..cfg.trials)
                .into_par_iter()
                .filter(|&t| logical_trial(&cfg.spec, &noise, trial_stream(point, t)))
                .count() as u64;
            LogicalRow {
                p,
                trials: cfg.trials,
                failures,
                rate: failures as f64 / cfg.trials as f64,
            }
        })
        .collect())
}

pub fn logical_csv(rows: &[LogicalRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{LOGICAL_CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(out, "{},{},{},{}", r.p, r.trials, r.failures, r.rate).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalConfig {
    pub spec: LatticeSpec,
    pub spawn_period: u32,
    pub warmup: usize,
    pub seed: u64,
    pub episodes: u64,
    pub cap: u64,
    pub policy: Policy,
    pub rank: RankOptions,
}

impl Default for SurvivalConfig {
    fn default() -> Self {
        Self {
            spec: LatticeSpec::default(),
            spawn_period: 1,
            warmup: crate::game::DEFAULT_WARMUP,
            seed: 0,
            episodes: 200,
            cap: DEFAULT_CAP,
            policy: Policy::Pairrank,
            rank: RankOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurvivalRow {
    pub episode: u64,
    pub policy: Policy,
    pub moves_survived: u64,
    /// The episode hit the move cap while still running.
    pub censored: bool,
}

/// Game seed for an episode; shared across policies so they face the same
/// opening board and spawn sequence.
pub fn episode_seed(seed: u64, episode: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ episode.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn play_episode(cfg: &SurvivalConfig, episode: u64) -> SurvivalRow {
    let game_seed = episode_seed(cfg.seed, episode);
    let mut g = GameState::new(GameConfig {
        spec: cfg.spec,
        noise: NoiseSpec {
            spawn_period: cfg.spawn_period,
            seed: game_seed,
            ..NoiseSpec::default()
        },
        mode: Mode::Dynamic,
        warmup: cfg.warmup,
    })
    .expect("validated configuration");
    let mut policy_rng = stream_rng(game_seed, 1);
    while g.status == Status::Running && g.moves_made < cfg.cap {
        let mv = match cfg.policy {
            Policy::Pairrank => g.suggest_move(cfg.rank).map(|d| d.mv),
            Policy::Random => g.legal_moves().choose(&mut policy_rng).copied(),
        };
        let Some(mv) = mv else { break };
        g.apply_player_move(mv)
            .expect("policies only propose legal moves");
    }
    SurvivalRow {
        episode,
        policy: cfg.policy,
        moves_survived: g.moves_made,
        censored: g.status == Status::Running,
    }
}

pub fn run_survival_experiment(cfg: &SurvivalConfig) -> Result<Vec<SurvivalRow>, ExperimentError> {
    cfg.spec
        .validate()
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    if cfg.spawn_period == 0 {
        return Err(ExperimentError::Config("spawn period must be at least 1".into()));
    }
    Ok((0..cfg.episodes)
        .into_par_iter()
        .map(|e| play_episode(cfg, e))
        .collect())
}

pub fn survival_csv(rows: &[SurvivalRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{SURVIVAL_CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(out, "{},{},{}", r.episode, r.policy.as_str(), r.moves_survived).unwrap();
    }
    out
}

pub fn write_csv(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    fs::write(path, contents)?;
    Ok(())
}
