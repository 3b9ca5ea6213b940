//! Text save files.
//!
//! ```text
//! DECODOKU-SAVE v1
//! variant=Z10 grid=8x8 d=10 seed=12345 mode=dynamic spawn_period=1 p=0.0
//! E H 2 2 3
//! M 2,1 -> 2,2
//! B 3,0 -> OFF:left
//! # free-text annotation
//! END score=17 status=over
//! ```
//!
//! `E` lines record resolved errors (orientation, row, column, magnitude),
//! `M` lines moves between adjacent plaquettes and `B` lines pushes off a
//! side. Annotations follow the move of the tick they were written at.
//! Lines are in chronological order, so replaying a file never touches the
//! RNG.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::game::{GameConfig, GameError, GameState, Mode, Move, Status, Target};
use crate::lattice::{ErrorEvent, LatticeSpec, Orientation, Plaquette, QuditId};
use crate::noise::NoiseSpec;

pub const MAGIC: &str = "DECODOKU-SAVE";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SaveError {
    #[error("line {line}: bad header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: unsupported save version {found}")]
    Version { line: usize, found: String },
    #[error("line {line}: parse error: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: invalid record: {reason}")]
    Validation { line: usize, reason: String },
    #[error("line {line}: replay failed: {reason}")]
    Replay { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaveHeader {
    pub version: u32,
    pub spec: LatticeSpec,
    pub seed: u64,
    pub mode: Mode,
    pub spawn_period: u32,
    pub p: f64,
}

impl SaveHeader {
    pub fn variant(&self) -> String {
        format!("Z{}", self.spec.d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyLine {
    Error { qudit: QuditId, magnitude: u32 },
    Move(Move),
    Annotation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Footer {
    pub score: u64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaveDocument {
    pub header: SaveHeader,
    pub body: Vec<BodyLine>,
    pub footer: Footer,
}

/// Number of the first body line in the file.
const BODY_OFFSET: usize = 3;

impl SaveDocument {
    pub fn from_game(g: &GameState) -> Self {
        let cfg = &g.config;
        let header = SaveHeader {
            version: VERSION,
            spec: cfg.spec,
            seed: cfg.noise.seed,
            mode: cfg.mode,
            spawn_period: cfg.noise.spawn_period,
            p: cfg.noise.p,
        };
        let mut body = Vec::new();
        let errors_at = |t: u64| {
            g.error_log
                .iter()
                .filter(move |l| l.tick == t)
                .map(|l| BodyLine::Error {
                    qudit: l.event.qudit,
                    magnitude: l.event.magnitude,
                })
        };
        let notes_at = |t: u64| {
            g.annotations
                .iter()
                .filter(move |a| a.tick == t)
                .map(|a| BodyLine::Annotation(a.text.clone()))
        };
        body.extend(errors_at(0));
        body.extend(notes_at(0));
        for rec in &g.move_log {
            body.push(BodyLine::Move(rec.mv));
            body.extend(notes_at(rec.tick));
            body.extend(errors_at(rec.tick));
        }
        Self {
            header,
            body,
            footer: Footer {
                score: g.score,
                status: g.status,
            },
        }
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        writeln!(out, "{MAGIC} v{}", h.version).unwrap();
        writeln!(
            out,
            "variant={} grid={}x{} d={} seed={} mode={} spawn_period={} p={:?}",
            h.variant(),
            h.spec.width,
            h.spec.height,
            h.spec.d,
            h.seed,
            h.mode.as_str(),
            h.spawn_period,
            h.p
        )
        .unwrap();
        for line in &self.body {
            match line {
                BodyLine::Error { qudit, magnitude } => writeln!(out, "E {qudit} {magnitude}").unwrap(),
                BodyLine::Move(mv) if mv.is_boundary_push() => writeln!(out, "B {mv}").unwrap(),
                BodyLine::Move(mv) => writeln!(out, "M {mv}").unwrap(),
                BodyLine::Annotation(text) => writeln!(out, "# {text}").unwrap(),
            }
        }
        writeln!(
            out,
            "END score={} status={}",
            self.footer.score,
            self.footer.status.as_str()
        )
        .unwrap();
        out
    }

    pub fn parse(text: &str) -> Result<Self, SaveError> {
        let lines: Vec<&str> = text.lines().collect();
        let magic = lines.first().copied().unwrap_or("");
        let header_err = |line: usize, reason: &str| SaveError::Header {
            line,
            reason: reason.to_string(),
        };
        match magic.strip_prefix(MAGIC).and_then(|r| r.strip_prefix(" v")) {
            Some(v) if v == VERSION.to_string() => {}
            Some(v) => {
                return Err(SaveError::Version {
                    line: 1,
                    found: v.to_string(),
                })
            }
            None => return Err(header_err(1, &format!("expected `{MAGIC} v{VERSION}`"))),
        }
        let header = parse_header(lines.get(1).copied().ok_or_else(|| header_err(2, "missing"))?)?;

        let end_idx = lines
            .iter()
            .rposition(|l| l.starts_with("END"))
            .filter(|&i| i >= 2)
            .ok_or_else(|| SaveError::Parse {
                line: lines.len() + 1,
                reason: "missing END line".into(),
            })?;
        if end_idx + 1 != lines.len() {
            return Err(SaveError::Parse {
                line: end_idx + 2,
                reason: "content after END".into(),
            });
        }
        let footer = parse_footer(lines[end_idx], end_idx + 1)?;
        let body = lines[2..end_idx]
            .iter()
            .enumerate()
            .map(|(i, l)| parse_body_line(l, i + BODY_OFFSET, &header.spec))
            .collect::<Result<_, _>>()?;
        Ok(Self { header, body, footer })
    }

    /// Rebuilds the game the file records, verifying the footer.
    pub fn replay(&self) -> Result<GameState, SaveError> {
        let h = &self.header;
        let opening_errors = self
            .body
            .iter()
            .take_while(|l| !matches!(l, BodyLine::Move(_)))
            .filter(|l| matches!(l, BodyLine::Error { .. }))
            .count();
        let config = GameConfig {
            spec: h.spec,
            noise: NoiseSpec {
                p: h.p,
                seed: h.seed,
                spawn_period: h.spawn_period,
                ..NoiseSpec::default()
            },
            mode: h.mode,
            warmup: match h.mode {
                Mode::Dynamic => opening_errors,
                Mode::Puzzle => 0,
            },
        };
        let mut g = GameState::blank(config).map_err(|e| SaveError::Replay {
            line: 2,
            reason: e.to_string(),
        })?;
        let dynamic = h.mode == Mode::Dynamic;
        // Recorded errors are applied from the file, but the RNG must still
        // advance past the draws that produced them so that continued play
        // spawns the same errors the original game would have.
        if !dynamic {
            g.skip_opening_draws();
        }
        for (i, line) in self.body.iter().enumerate() {
            let line_no = i + BODY_OFFSET;
            let fail = |e: GameError| SaveError::Replay {
                line: line_no,
                reason: e.to_string(),
            };
            match line {
                BodyLine::Error { qudit, magnitude } => {
                    let event = ErrorEvent {
                        qudit: *qudit,
                        magnitude: *magnitude,
                        event_id: g.error_log.len() as u64,
                    };
                    let tick = g.moves_made;
                    g.apply_error(event, tick).map_err(fail)?;
                    if dynamic {
                        g.skip_spawn_draw();
                    }
                }
                BodyLine::Move(mv) => {
                    // Spawns for the previous move are in place; settle its
                    // game-over check before accepting another move.
                    if dynamic && g.moves_made > 0 {
                        g.update_status();
                    }
                    g.apply_move_only(*mv).map_err(fail)?;
                }
                BodyLine::Annotation(text) => g.annotate(text),
            }
        }
        if dynamic && g.moves_made > 0 {
            g.update_status();
        }
        if g.score != self.footer.score || g.status != self.footer.status {
            return Err(SaveError::Replay {
                line: self.body.len() + BODY_OFFSET,
                reason: format!(
                    "footer says score={} status={}, replay gives score={} status={}",
                    self.footer.score,
                    self.footer.status.as_str(),
                    g.score,
                    g.status.as_str()
                ),
            });
        }
        Ok(g)
    }
}

pub fn serialize(g: &GameState) -> String {
    SaveDocument::from_game(g).to_text()
}

pub fn parse(text: &str) -> Result<SaveDocument, SaveError> {
    SaveDocument::parse(text)
}

pub fn replay(doc: &SaveDocument) -> Result<GameState, SaveError> {
    doc.replay()
}

fn num<T: FromStr>(s: &str, what: &str, line: usize) -> Result<T, SaveError> {
    s.parse().map_err(|_| SaveError::Parse {
        line,
        reason: format!("bad {what} `{s}`"),
    })
}

fn parse_header(line: &str) -> Result<SaveHeader, SaveError> {
    const KEYS: [&str; 7] = ["variant", "grid", "d", "seed", "mode", "spawn_period", "p"];
    let err = |reason: String| SaveError::Header { line: 2, reason };
    let tokens: Vec<&str> = line.split(' ').collect();
    if tokens.len() != KEYS.len() {
        return Err(err(format!("expected {} fields", KEYS.len())));
    }
    let mut vals = [""; 7];
    for (i, (tok, key)) in tokens.iter().zip(KEYS).enumerate() {
        vals[i] = tok
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| err(format!("expected `{key}=` in field {}", i + 1)))?;
    }
    let hnum = |s: &str, what: &str| -> Result<u64, SaveError> {
        s.parse().map_err(|_| err(format!("bad {what} `{s}`")))
    };
    let (w, h) = vals[1]
        .split_once('x')
        .ok_or_else(|| err(format!("bad grid `{}`", vals[1])))?;
    let d = hnum(vals[2], "d")?;
    let spec = LatticeSpec::new(
        hnum(w, "grid width")? as usize,
        hnum(h, "grid height")? as usize,
        u32::try_from(d).map_err(|_| err(format!("bad d `{d}`")))?,
    )
    .map_err(|e| err(e.to_string()))?;
    if vals[0] != format!("Z{}", spec.d) {
        return Err(err(format!("variant `{}` does not match d={}", vals[0], spec.d)));
    }
    let mode = match vals[4] {
        "dynamic" => Mode::Dynamic,
        "puzzle" => Mode::Puzzle,
        other => return Err(err(format!("unknown mode `{other}`"))),
    };
    let spawn_period = hnum(vals[5], "spawn_period")?;
    let p: f64 = vals[6].parse().map_err(|_| err(format!("bad p `{}`", vals[6])))?;
    if spawn_period == 0 || spawn_period > u32::MAX as u64 || !(0.0..=1.0).contains(&p) {
        return Err(err("spawn_period or p out of range".into()));
    }
    Ok(SaveHeader {
        version: VERSION,
        spec,
        seed: hnum(vals[3], "seed")?,
        mode,
        spawn_period: spawn_period as u32,
        p,
    })
}

fn parse_footer(line: &str, line_no: usize) -> Result<Footer, SaveError> {
    let err = || SaveError::Parse {
        line: line_no,
        reason: format!("bad footer `{line}`"),
    };
    let rest = line.strip_prefix("END score=").ok_or_else(err)?;
    let (score, status) = rest.split_once(" status=").ok_or_else(err)?;
    let status = match status {
        "running" => Status::Running,
        "over" => Status::Over,
        _ => return Err(err()),
    };
    Ok(Footer {
        score: num(score, "score", line_no)?,
        status,
    })
}

fn parse_plaquette(s: &str, line: usize, spec: &LatticeSpec) -> Result<Plaquette, SaveError> {
    let (r, c) = s.split_once(',').ok_or_else(|| SaveError::Parse {
        line,
        reason: format!("bad coordinate `{s}`"),
    })?;
    let p = Plaquette::new(num(r, "row", line)?, num(c, "column", line)?);
    if !spec.contains(p) {
        return Err(SaveError::Validation {
            line,
            reason: format!("plaquette {p} outside the grid"),
        });
    }
    Ok(p)
}

fn parse_body_line(line: &str, line_no: usize, spec: &LatticeSpec) -> Result<BodyLine, SaveError> {
    if let Some(text) = line.strip_prefix('#') {
        return Ok(BodyLine::Annotation(
            text.strip_prefix(' ').unwrap_or(text).to_string(),
        ));
    }
    let invalid = |reason: String| SaveError::Validation {
        line: line_no,
        reason,
    };
    let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
    match tag {
        "E" => {
            let t: Vec<&str> = rest.split(' ').collect();
            if t.len() != 4 {
                return Err(SaveError::Parse {
                    line: line_no,
                    reason: "error line needs orientation, row, column, magnitude".into(),
                });
            }
            let orientation = match t[0] {
                "H" => Orientation::Horizontal,
                "V" => Orientation::Vertical,
                o => {
                    return Err(SaveError::Parse {
                        line: line_no,
                        reason: format!("bad orientation `{o}`"),
                    })
                }
            };
            let qudit = QuditId {
                orientation,
                row: num(t[1], "row", line_no)?,
                col: num(t[2], "column", line_no)?,
            };
            let magnitude: u32 = num(t[3], "magnitude", line_no)?;
            if !spec.contains_qudit(qudit) {
                return Err(invalid(format!("qudit {qudit} outside the lattice")));
            }
            if magnitude == 0 || magnitude >= spec.d {
                return Err(invalid(format!("magnitude {magnitude} outside 1..{}", spec.d)));
            }
            Ok(BodyLine::Error { qudit, magnitude })
        }
        "M" | "B" => {
            let (from, to) = rest.split_once(" -> ").ok_or_else(|| SaveError::Parse {
                line: line_no,
                reason: "expected `FROM -> TO`".into(),
            })?;
            let from = parse_plaquette(from, line_no, spec)?;
            let target = match (tag, to) {
                ("B", "OFF:left") => {
                    if from.col != 0 {
                        return Err(invalid(format!("{from} is not on the left edge")));
                    }
                    Target::OffLeft
                }
                ("B", "OFF:right") => {
                    if from.col + 1 != spec.width {
                        return Err(invalid(format!("{from} is not on the right edge")));
                    }
                    Target::OffRight
                }
                ("B", other) => {
                    return Err(SaveError::Parse {
                        line: line_no,
                        reason: format!("bad boundary `{other}`"),
                    })
                }
                _ => {
                    let to = parse_plaquette(to, line_no, spec)?;
                    if from.manhattan(to) != 1 {
                        return Err(invalid(format!("{from} and {to} are not adjacent")));
                    }
                    Target::Plaquette(to)
                }
            };
            Ok(BodyLine::Move(Move::new(from, target)))
        }
        other => Err(SaveError::Parse {
            line: line_no,
            reason: format!("unknown line tag `{other}`"),
        }),
    }
}
