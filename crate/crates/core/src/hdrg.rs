//! Neutral-cluster renormalisation decoder.
//!
//! Every defect starts as its own non-neutral cluster. Each round, every
//! non-neutral cluster picks its nearest other cluster and all picks are
//! merged at once; a cluster whose charges sum to zero mod d becomes neutral.
//! Neutral clusters stop looking for partners but stay on the board, so a
//! non-neutral cluster may still merge into one. The two absorbing sides are
//! modelled as permanently neutral clusters that can swallow any charge.
//!
//! Once everything is neutral, each cluster's charges are routed row-first to
//! its Manhattan median (or straight off its boundary) and the traversed
//! qudit shifts form the correction.

use serde::{Deserialize, Serialize};

use crate::cluster::centroid;
use crate::lattice::{CorrectionLedger, LatticeSpec, Plaquette, Side, SyndromeState};

pub const LEFT_ID: u64 = 0;
pub const RIGHT_ID: u64 = 1;
const FIRST_DEFECT_ID: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderCluster {
    pub id: u64,
    pub members: Vec<(Plaquette, u32)>,
    pub boundary: Option<Side>,
    pub neutral: bool,
}

impl DecoderCluster {
    fn value_sum(&self, d: u32) -> u32 {
        let d = d as u64;
        (self.members.iter().map(|&(_, v)| v as u64).sum::<u64>() % d) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterState {
    pub spec: LatticeSpec,
    /// Sorted by id; the two boundary clusters are always present.
    pub clusters: Vec<DecoderCluster>,
}

impl ClusterState {
    pub fn all_neutral(&self) -> bool {
        self.clusters.iter().all(|c| c.neutral)
    }

    pub fn non_neutral_count(&self) -> usize {
        self.clusters.iter().filter(|c| !c.neutral).count()
    }

    pub fn get(&self, id: u64) -> Option<&DecoderCluster> {
        self.clusters.iter().find(|c| c.id == id)
    }
}

/// One singleton cluster per defect plus the two boundary clusters.
pub fn initial_clusters(syndrome: &SyndromeState) -> ClusterState {
    let mut clusters = vec![
        DecoderCluster {
            id: LEFT_ID,
            members: Vec::new(),
            boundary: Some(Side::Left),
            neutral: true,
        },
        DecoderCluster {
            id: RIGHT_ID,
            members: Vec::new(),
            boundary: Some(Side::Right),
            neutral: true,
        },
    ];
    clusters.extend(
        syndrome
            .defects()
            .into_iter()
            .zip(FIRST_DEFECT_ID..)
            .map(|(m, id)| DecoderCluster {
                id,
                members: vec![m],
                boundary: None,
                neutral: false,
            }),
    );
    ClusterState {
        spec: *syndrome.spec(),
        clusters,
    }
}

fn boundary_distance(p: Plaquette, side: Side, width: usize) -> usize {
    match side {
        Side::Left => p.col + 1,
        Side::Right => width - p.col,
    }
}

fn cluster_distance(from: &DecoderCluster, to: &DecoderCluster, width: usize) -> usize {
    let mut best = usize::MAX;
    for &(p, _) in &from.members {
        for &(q, _) in &to.members {
            best = best.min(p.manhattan(q));
        }
        if let Some(side) = to.boundary {
            best = best.min(boundary_distance(p, side, width));
        }
    }
    best
}

/// Index of the cluster nearest to `clusters[i]`. Ties prefer clusters
/// without a boundary, then the smaller id.
fn nearest(clusters: &[DecoderCluster], i: usize, width: usize) -> usize {
    let from = &clusters[i];
    (0..clusters.len())
        .filter(|&j| j != i)
        .min_by_key(|&j| {
            let c = &clusters[j];
            (cluster_distance(from, c, width), c.boundary.is_some(), c.id)
        })
        .expect("boundary clusters are always present")
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Merges every non-neutral cluster with its nearest cluster, all at once,
/// then recomputes neutrality.
pub fn merge_round(cs: &ClusterState) -> ClusterState {
    let width = cs.spec.width;
    let d = cs.spec.d;
    let n = cs.clusters.len();
    let links: Vec<(usize, usize)> = (0..n)
        .filter(|&i| !cs.clusters[i].neutral)
        .map(|i| (i, nearest(&cs.clusters, i, width)))
        .collect();

    let mut parent: Vec<usize> = (0..n).collect();
    for (a, b) in links {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra != rb {
            let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[drop] = keep;
        }
    }

    // Clusters are sorted by id, so the root index carries the smallest id.
    let mut merged: Vec<Option<DecoderCluster>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        let src = &cs.clusters[i];
        let slot = merged[r].get_or_insert_with(|| DecoderCluster {
            id: cs.clusters[r].id,
            members: Vec::new(),
            boundary: None,
            neutral: false,
        });
        slot.members.extend_from_slice(&src.members);
        if src.boundary.is_some() {
            slot.boundary = src.boundary;
        }
    }
    let clusters = merged
        .into_iter()
        .flatten()
        .map(|mut c| {
            c.members.sort();
            c.neutral = c.boundary.is_some() || c.value_sum(d) == 0;
            c
        })
        .collect();
    ClusterState {
        spec: cs.spec,
        clusters,
    }
}

/// Decoder output with the number of merge rounds it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub ledger: CorrectionLedger,
    pub rounds: usize,
    pub clusters: ClusterState,
}

/// Carries charge `value` from `from` to `to` along a row-first Manhattan
/// path, recording each traversed qudit shift.
fn route(ledger: &mut CorrectionLedger, spec: &LatticeSpec, from: Plaquette, to: Plaquette, value: u32) {
    let mut cur = from;
    while cur != to {
        let next = if cur.row < to.row {
            Plaquette::new(cur.row + 1, cur.col)
        } else if cur.row > to.row {
            Plaquette::new(cur.row - 1, cur.col)
        } else if cur.col < to.col {
            Plaquette::new(cur.row, cur.col + 1)
        } else {
            Plaquette::new(cur.row, cur.col - 1)
        };
        let (q, k) = spec
            .transfer_shift(cur, next, value)
            .expect("adjacent plaquettes inside the grid");
        ledger.add(q, k, spec.d);
        cur = next;
    }
}

fn push_off(ledger: &mut CorrectionLedger, spec: &LatticeSpec, from: Plaquette, value: u32, side: Side) {
    let edge_col = match side {
        Side::Left => 0,
        Side::Right => spec.width - 1,
    };
    route(ledger, spec, from, Plaquette::new(from.row, edge_col), value);
    let (q, k) = match side {
        // Left edges add +k to column 0, right edges -k to column W-1.
        Side::Left => (
            crate::lattice::QuditId::horizontal(from.row, 0),
            (spec.d - value % spec.d) % spec.d,
        ),
        Side::Right => (
            crate::lattice::QuditId::horizontal(from.row, spec.width),
            value % spec.d,
        ),
    };
    ledger.add(q, k, spec.d);
}

/// Correction for a fully neutral cluster state.
pub fn annihilation_ledger(cs: &ClusterState) -> CorrectionLedger {
    let spec = &cs.spec;
    let mut ledger = CorrectionLedger::new();
    for c in &cs.clusters {
        debug_assert!(c.neutral);
        match c.boundary {
            Some(side) => {
                for &(p, v) in &c.members {
                    push_off(&mut ledger, spec, p, v, side);
                }
            }
            None if c.members.is_empty() => {}
            None => {
                let positions: Vec<_> = c.members.iter().map(|&(p, _)| p).collect();
                let centre = centroid(&positions).expect("nonempty cluster");
                for &(p, v) in &c.members {
                    route(&mut ledger, spec, p, centre, v);
                }
            }
        }
    }
    ledger
}

pub fn hdrg_decode_detailed(syndrome: &SyndromeState) -> DecodeOutcome {
    let mut cs = initial_clusters(syndrome);
    let mut rounds = 0;
    while !cs.all_neutral() {
        cs = merge_round(&cs);
        rounds += 1;
    }
    DecodeOutcome {
        ledger: annihilation_ledger(&cs),
        rounds,
        clusters: cs,
    }
}

/// Correction that clears `syndrome`.
pub fn hdrg_decode(syndrome: &SyndromeState) -> CorrectionLedger {
    hdrg_decode_detailed(syndrome).ledger
}
