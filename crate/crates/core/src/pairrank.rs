//! Pair-ranking bot.
//!
//! Every defect is described by its cluster size, its cluster's Manhattan
//! median and its number of orthogonal neighbours. Every pair of defects is
//! then scored and the pairs are sorted lexicographically:
//!
//! 1. same-cluster pairs first;
//! 2. pairs closer than 4 before the rest, nearer first;
//! 3. among pairs at distance 4 or more, farther first;
//! 4. larger summed distance to the cluster centres first;
//! 5. exactly one defect with neighbours, then neither, then both.
//!
//! Remaining ties fall back to row-major order of the pair positions, which
//! makes the order total. The bot steps one defect of the best pair one
//! plaquette towards the other; it re-ranks after every step.

use std::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::cluster::ProvenanceTracker;
use crate::game::{Move, Target};
use crate::lattice::{Plaquette, SyndromeState};

/// Pairs closer than this are in the near bucket.
pub const NEAR_DISTANCE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefectFeatures {
    pub position: Plaquette,
    pub value: u32,
    pub cluster_id: u64,
    /// Defects in the same cluster, this one included.
    pub cluster_size: usize,
    pub cluster_centre: Plaquette,
    /// Defects at Manhattan distance exactly 1.
    pub neighbour_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairFeatures {
    pub a: DefectFeatures,
    pub b: DefectFeatures,
    pub distance: usize,
    pub same_cluster: bool,
    pub via_centre: usize,
    pub annihilates: bool,
    /// Defects adjacent to `a` or `b` that would complete an annihilating
    /// triplet. Only counted when the pair itself does not annihilate.
    pub helpful_neighbours: usize,
    pub a_neighbours: usize,
    pub b_neighbours: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOptions {
    /// Rank annihilating pairs, then pairs with more helpful neighbours,
    /// directly after the same-cluster rule.
    pub prefer_annihilating: bool,
}

/// The bot's chosen step and the pair that motivated it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub mv: Move,
    /// `None` when a lone defect is pushed towards a boundary.
    pub rationale: Option<PairFeatures>,
}

pub fn defect_features(state: &SyndromeState, tracker: &ProvenanceTracker) -> Vec<DefectFeatures> {
    let spec = *state.spec();
    let clusters = tracker.clusters(state);
    let mut out = Vec::with_capacity(state.defect_count());
    for c in &clusters {
        for &(position, value) in &c.members {
            let neighbour_count = spec.neighbours(position).filter(|&n| state.get(n) != 0).count();
            out.push(DefectFeatures {
                position,
                value,
                cluster_id: c.id,
                cluster_size: c.size(),
                cluster_centre: c.centre,
                neighbour_count,
            });
        }
    }
    out.sort_by_key(|f| f.position);
    out
}

pub fn pair_features(
    fa: &DefectFeatures,
    fb: &DefectFeatures,
    all: &[DefectFeatures],
    d: u32,
) -> PairFeatures {
    let distance = fa.position.manhattan(fb.position);
    let adjacent = distance == 1;
    let annihilates = (fa.value + fb.value).is_multiple_of(d);
    let helpful_neighbours = if annihilates {
        0
    } else {
        all.iter()
            .filter(|n| n.position != fa.position && n.position != fb.position)
            .filter(|n| n.position.manhattan(fa.position) == 1 || n.position.manhattan(fb.position) == 1)
            .filter(|n| (fa.value + fb.value + n.value).is_multiple_of(d))
            .count()
    };
    PairFeatures {
        a: *fa,
        b: *fb,
        distance,
        same_cluster: fa.cluster_id == fb.cluster_id,
        via_centre: fa.position.manhattan(fa.cluster_centre) + fb.position.manhattan(fb.cluster_centre),
        annihilates,
        helpful_neighbours,
        a_neighbours: fa.neighbour_count - usize::from(adjacent),
        b_neighbours: fb.neighbour_count - usize::from(adjacent),
    }
}

/// Features for every unordered pair, `a` before `b` in row-major order.
pub fn all_pairs(features: &[DefectFeatures], d: u32) -> Vec<PairFeatures> {
    let mut sorted = features.to_vec();
    sorted.sort_by_key(|f| f.position);
    let mut pairs = Vec::with_capacity(sorted.len() * sorted.len().saturating_sub(1) / 2);
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            pairs.push(pair_features(&sorted[i], &sorted[j], &sorted, d));
        }
    }
    pairs
}

fn distance_bucket(distance: usize) -> (u8, usize, Reverse<usize>) {
    if distance < NEAR_DISTANCE {
        (0, distance, Reverse(0))
    } else {
        (1, 0, Reverse(distance))
    }
}

fn neighbour_category(p: &PairFeatures) -> u8 {
    match (p.a_neighbours > 0, p.b_neighbours > 0) {
        (true, false) | (false, true) => 0,
        (false, false) => 1,
        (true, true) => 2,
    }
}

fn positions(p: &PairFeatures) -> (Plaquette, Plaquette) {
    if p.a.position <= p.b.position {
        (p.a.position, p.b.position)
    } else {
        (p.b.position, p.a.position)
    }
}

/// `Less` means `x` ranks above `y`.
pub fn compare_pairs(x: &PairFeatures, y: &PairFeatures, opts: RankOptions) -> Ordering {
    let mut ord = y.same_cluster.cmp(&x.same_cluster);
    if opts.prefer_annihilating {
        ord = ord
            .then_with(|| y.annihilates.cmp(&x.annihilates))
            .then_with(|| y.helpful_neighbours.cmp(&x.helpful_neighbours));
    }
    ord.then_with(|| distance_bucket(x.distance).cmp(&distance_bucket(y.distance)))
        .then_with(|| y.via_centre.cmp(&x.via_centre))
        .then_with(|| neighbour_category(x).cmp(&neighbour_category(y)))
        .then_with(|| positions(x).cmp(&positions(y)))
}

pub fn rank_pairs(mut pairs: Vec<PairFeatures>, opts: RankOptions) -> Vec<PairFeatures> {
    pairs.sort_by(|x, y| compare_pairs(x, y, opts));
    pairs
}

fn step_towards(from: Plaquette, to: Plaquette) -> Plaquette {
    use std::cmp::Ordering::*;
    match (from.row.cmp(&to.row), from.col.cmp(&to.col)) {
        (Less, _) => Plaquette::new(from.row + 1, from.col),
        (Greater, _) => Plaquette::new(from.row - 1, from.col),
        (Equal, Less) => Plaquette::new(from.row, from.col + 1),
        (Equal, Greater) => Plaquette::new(from.row, from.col - 1),
        (Equal, Equal) => from,
    }
}

/// One step of a lone defect towards the nearer absorbing boundary; ties go
/// left.
pub fn boundary_step(position: Plaquette, width: usize) -> Move {
    let to_left = position.col + 1;
    let to_right = width - position.col;
    let to = if to_left <= to_right {
        if position.col == 0 {
            Target::OffLeft
        } else {
            Target::Plaquette(Plaquette::new(position.row, position.col - 1))
        }
    } else if position.col + 1 == width {
        Target::OffRight
    } else {
        Target::Plaquette(Plaquette::new(position.row, position.col + 1))
    };
    Move { from: position, to }
}

/// The single step that realises the best-ranked pair.
pub fn move_for_pair(pair: &PairFeatures) -> Move {
    let (mover, partner) = match pair.a_neighbours.cmp(&pair.b_neighbours) {
        Ordering::Less => (pair.a.position, pair.b.position),
        Ordering::Greater => (pair.b.position, pair.a.position),
        Ordering::Equal => {
            let (lo, hi) = positions(pair);
            (lo, hi)
        }
    };
    Move {
        from: mover,
        to: Target::Plaquette(step_towards(mover, partner)),
    }
}

/// Picks the bot's next elementary move, or `None` on an empty board.
pub fn select_action(
    state: &SyndromeState,
    tracker: &ProvenanceTracker,
    opts: RankOptions,
) -> Option<Decision> {
    let features = defect_features(state, tracker);
    match features.len() {
        0 => None,
        1 => Some(Decision {
            mv: boundary_step(features[0].position, state.spec().width),
            rationale: None,
        }),
        _ => {
            let d = state.spec().d;
            let best = all_pairs(&features, d)
                .into_iter()
                .min_by(|x, y| compare_pairs(x, y, opts))
                .expect("at least one pair");
            Some(Decision {
                mv: move_for_pair(&best),
                rationale: Some(best),
            })
        }
    }
}
