//! Planar Z_d code lattice.
//!
//! Plaquettes form an `height x width` grid. Qudits live on the edges between
//! plaquettes: horizontal edge `(r, c)` separates plaquettes `(r, c-1)` and
//! `(r, c)`, with `c = 0` the left absorbing edge and `c = width` the right
//! absorbing edge of row `r`. Vertical edge `(r, c)` separates `(r-1, c)` and
//! `(r, c)` for `1 <= r <= height-1`; top and bottom are closed.
//!
//! A shift of magnitude `k` on an interior edge adds `+k` to the lower-index
//! plaquette and `-k` to the other one. On absorbing edges the single
//! neighbour receives `+k` (left) or `-k` (right) and the partner charge is
//! accumulated into the matching absorbed total.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("invalid lattice: {0}")]
    InvalidSpec(String),
    #[error("invalid qudit coordinate {0}")]
    InvalidQudit(QuditId),
    #[error("invalid plaquette coordinate {0}")]
    InvalidPlaquette(Plaquette),
    #[error("shift magnitude {k} outside 1..{d}")]
    InvalidMagnitude { k: u32, d: u32 },
    #[error("cut column {cut} outside 0..={width}")]
    InvalidCut { cut: usize, width: usize },
}

/// Lattice dimensions and qudit dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub width: usize,
    pub height: usize,
    pub d: u32,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            width: 8,
            height: 8,
            d: 10,
        }
    }
}

impl LatticeSpec {
    pub fn new(width: usize, height: usize, d: u32) -> Result<Self, LatticeError> {
        let spec = Self { width, height, d };
        spec.validate()?;
        Ok(spec)
    }

    pub fn square(size: usize, d: u32) -> Result<Self, LatticeError> {
        Self::new(size, size, d)
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        if self.width < 2 || self.height < 2 {
            return Err(LatticeError::InvalidSpec(format!(
                "grid {}x{} must be at least 2x2",
                self.width, self.height
            )));
        }
        if self.d < 2 {
            return Err(LatticeError::InvalidSpec(format!(
                "qudit dimension {} must be at least 2",
                self.d
            )));
        }
        Ok(())
    }

    pub fn plaquette_count(&self) -> usize {
        self.width * self.height
    }

    pub fn qudit_count(&self) -> usize {
        self.height * (self.width + 1) + (self.height - 1) * self.width
    }

    pub fn contains(&self, p: Plaquette) -> bool {
        p.row < self.height && p.col < self.width
    }

    pub fn contains_qudit(&self, q: QuditId) -> bool {
        match q.orientation {
            Orientation::Horizontal => q.row < self.height && q.col <= self.width,
            Orientation::Vertical => q.row >= 1 && q.row < self.height && q.col < self.width,
        }
    }

    /// All qudits: horizontal edges row-major, then vertical edges row-major.
    pub fn qudits(&self) -> impl Iterator<Item = QuditId> + '_ {
        let horizontal =
            (0..self.height).flat_map(move |r| (0..=self.width).map(move |c| QuditId::horizontal(r, c)));
        let vertical =
            (1..self.height).flat_map(move |r| (0..self.width).map(move |c| QuditId::vertical(r, c)));
        horizontal.chain(vertical)
    }

    /// Plaquettes in row-major order.
    pub fn plaquettes(&self) -> impl Iterator<Item = Plaquette> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| Plaquette::new(r, c)))
    }

    pub fn index(&self, p: Plaquette) -> usize {
        p.row * self.width + p.col
    }

    /// Orthogonally adjacent plaquettes inside the grid, in row-major order.
    pub fn neighbours(&self, p: Plaquette) -> impl Iterator<Item = Plaquette> + '_ {
        let candidates = [
            (p.row.checked_sub(1), Some(p.col)),
            (Some(p.row), p.col.checked_sub(1)),
            (Some(p.row), Some(p.col + 1)),
            (Some(p.row + 1), Some(p.col)),
        ];
        candidates.into_iter().filter_map(move |(r, c)| {
            let q = Plaquette::new(r?, c?);
            self.contains(q).then_some(q)
        })
    }

    /// The qudit shared by two orthogonally adjacent plaquettes.
    pub fn shared_qudit(&self, a: Plaquette, b: Plaquette) -> Option<QuditId> {
        if !self.contains(a) || !self.contains(b) || a.manhattan(b) != 1 {
            return None;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Some(if lo.row == hi.row {
            QuditId::horizontal(lo.row, hi.col)
        } else {
            QuditId::vertical(hi.row, hi.col)
        })
    }

    /// Shift magnitude on the shared qudit that carries charge `value` from
    /// `from` into the adjacent plaquette `to`.
    pub fn transfer_shift(&self, from: Plaquette, to: Plaquette, value: u32) -> Option<(QuditId, u32)> {
        let q = self.shared_qudit(from, to)?;
        let value = value % self.d;
        // + lands on the lower-index plaquette.
        let k = if to < from {
            value
        } else {
            (self.d - value) % self.d
        };
        Some((q, k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Plaquette {
    pub row: usize,
    pub col: usize,
}

impl Plaquette {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn manhattan(self, other: Plaquette) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

impl fmt::Display for Plaquette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuditId {
    pub orientation: Orientation,
    pub row: usize,
    pub col: usize,
}

impl QuditId {
    pub const fn horizontal(row: usize, col: usize) -> Self {
        Self {
            orientation: Orientation::Horizontal,
            row,
            col,
        }
    }

    pub const fn vertical(row: usize, col: usize) -> Self {
        Self {
            orientation: Orientation::Vertical,
            row,
            col,
        }
    }
}

impl fmt::Display for QuditId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.orientation {
            Orientation::Horizontal => 'H',
            Orientation::Vertical => 'V',
        };
        write!(f, "{} {} {}", tag, self.row, self.col)
    }
}

/// Which absorbing boundary an edge touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Plaquettes bordering `q` together with the sign a positive shift applies.
pub fn bordering_plaquettes(q: QuditId, spec: &LatticeSpec) -> Result<Vec<(Plaquette, i8)>, LatticeError> {
    if !spec.contains_qudit(q) {
        return Err(LatticeError::InvalidQudit(q));
    }
    Ok(match q.orientation {
        Orientation::Horizontal if q.col == 0 => vec![(Plaquette::new(q.row, 0), 1)],
        Orientation::Horizontal if q.col == spec.width => {
            vec![(Plaquette::new(q.row, spec.width - 1), -1)]
        }
        Orientation::Horizontal => vec![
            (Plaquette::new(q.row, q.col - 1), 1),
            (Plaquette::new(q.row, q.col), -1),
        ],
        Orientation::Vertical => vec![
            (Plaquette::new(q.row - 1, q.col), 1),
            (Plaquette::new(q.row, q.col), -1),
        ],
    })
}

/// The absorbing boundary `q` touches, if any.
pub fn boundary_side(q: QuditId, spec: &LatticeSpec) -> Option<Side> {
    match q.orientation {
        Orientation::Horizontal if q.col == 0 => Some(Side::Left),
        Orientation::Horizontal if q.col == spec.width => Some(Side::Right),
        _ => None,
    }
}

fn signed(k: u32, sign: i8, d: u32) -> u32 {
    let k = k % d;
    if sign >= 0 {
        k
    } else {
        (d - k) % d
    }
}

/// A single qudit error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorEvent {
    pub qudit: QuditId,
    pub magnitude: u32,
    pub event_id: u64,
}

/// Per-plaquette Z_d charges plus the charge pushed into each boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyndromeState {
    spec: LatticeSpec,
    values: Vec<u32>,
    absorbed_left: u32,
    absorbed_right: u32,
}

impl SyndromeState {
    pub fn new(spec: LatticeSpec) -> Self {
        Self {
            spec,
            values: vec![0; spec.plaquette_count()],
            absorbed_left: 0,
            absorbed_right: 0,
        }
    }

    pub fn from_errors<'a>(
        spec: LatticeSpec,
        errors: impl IntoIterator<Item = &'a ErrorEvent>,
    ) -> Result<Self, LatticeError> {
        let mut s = Self::new(spec);
        for e in errors {
            s.apply_shift(e.qudit, e.magnitude)?;
        }
        Ok(s)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn get(&self, p: Plaquette) -> u32 {
        self.values[self.spec.index(p)]
    }

    pub fn set(&mut self, p: Plaquette, value: u32) {
        let i = self.spec.index(p);
        self.values[i] = value % self.spec.d;
    }

    pub fn absorbed_left(&self) -> u32 {
        self.absorbed_left
    }

    pub fn absorbed_right(&self) -> u32 {
        self.absorbed_right
    }

    /// Applies a shift of magnitude `k` to qudit `q`.
    pub fn apply_shift(&mut self, q: QuditId, k: u32) -> Result<(), LatticeError> {
        let d = self.spec.d;
        if k == 0 || k >= d {
            return Err(LatticeError::InvalidMagnitude { k, d });
        }
        self.apply_shift_mod(q, k)
    }

    /// Like [`apply_shift`](Self::apply_shift) but accepts any magnitude,
    /// reduced mod d; a zero shift is a no-op.
    pub fn apply_shift_mod(&mut self, q: QuditId, k: u32) -> Result<(), LatticeError> {
        let d = self.spec.d;
        for (p, sign) in bordering_plaquettes(q, &self.spec)? {
            let i = self.spec.index(p);
            self.values[i] = (self.values[i] + signed(k, sign, d)) % d;
        }
        match boundary_side(q, &self.spec) {
            Some(Side::Left) => self.absorbed_left = (self.absorbed_left + signed(k, -1, d)) % d,
            Some(Side::Right) => self.absorbed_right = (self.absorbed_right + signed(k, 1, d)) % d,
            None => {}
        }
        Ok(())
    }

    pub fn apply_ledger(&mut self, ledger: &CorrectionLedger) -> Result<(), LatticeError> {
        for (&q, &k) in ledger.iter() {
            self.apply_shift_mod(q, k)?;
        }
        Ok(())
    }

    /// Nonzero plaquettes in row-major order.
    pub fn defects(&self) -> Vec<(Plaquette, u32)> {
        self.spec
            .plaquettes()
            .zip(self.values.iter().copied())
            .filter(|&(_, v)| v != 0)
            .collect()
    }

    pub fn defect_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_clear(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// `(sum of values + absorbed charges) mod d`; always zero.
    pub fn total_charge(&self) -> u32 {
        let d = self.spec.d as u64;
        let sum: u64 = self.values.iter().map(|&v| v as u64).sum::<u64>()
            + self.absorbed_left as u64
            + self.absorbed_right as u64;
        (sum % d) as u32
    }
}

/// Net correction shift per qudit, mod d. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorrectionLedger {
    net_shift: BTreeMap<QuditId, u32>,
}

impl CorrectionLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, q: QuditId, k: u32, d: u32) {
        let k = k % d;
        if k == 0 {
            return;
        }
        let entry = self.net_shift.entry(q).or_insert(0);
        *entry = (*entry + k) % d;
        if *entry == 0 {
            self.net_shift.remove(&q);
        }
    }

    pub fn get(&self, q: QuditId) -> u32 {
        self.net_shift.get(&q).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.net_shift.is_empty()
    }

    pub fn len(&self) -> usize {
        self.net_shift.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&QuditId, &u32)> {
        self.net_shift.iter()
    }
}

/// Net charge transported across the vertical cut at column `cut`.
///
/// Sums error and correction shifts on every horizontal edge `(r, cut)`.
/// Absorbing edges enter with the opposite sign to interior edges, matching
/// their sign convention, so the residue is cut-independent whenever the
/// combined error and correction leave no defects. A nonzero residue on a
/// cleared board is a logical failure.
pub fn cut_flux(
    errors: &[ErrorEvent],
    ledger: &CorrectionLedger,
    cut: usize,
    spec: &LatticeSpec,
) -> Result<u32, LatticeError> {
    if cut > spec.width {
        return Err(LatticeError::InvalidCut {
            cut,
            width: spec.width,
        });
    }
    let d = spec.d;
    let mut net = vec![0u32; spec.height];
    for e in errors {
        if e.qudit.orientation == Orientation::Horizontal && e.qudit.col == cut {
            net[e.qudit.row] = (net[e.qudit.row] + e.magnitude % d) % d;
        }
    }
    for (r, k) in net.iter_mut().enumerate() {
        *k = (*k + ledger.get(QuditId::horizontal(r, cut))) % d;
    }
    let sign = if cut == 0 || cut == spec.width { -1 } else { 1 };
    Ok(net.iter().fold(0, |acc, &k| (acc + signed(k, sign, d)) % d))
}

/// Cut flux for every column `0..=width`.
pub fn all_cut_fluxes(errors: &[ErrorEvent], ledger: &CorrectionLedger, spec: &LatticeSpec) -> Vec<u32> {
    (0..=spec.width)
        .map(|c| cut_flux(errors, ledger, c, spec).expect("cut in range"))
        .collect()
}

/// True when error plus correction leaves zero flux on every cut.
pub fn is_logically_trivial(errors: &[ErrorEvent], ledger: &CorrectionLedger, spec: &LatticeSpec) -> bool {
    all_cut_fluxes(errors, ledger, spec).iter().all(|&f| f == 0)
}
