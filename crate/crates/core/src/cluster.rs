//! Provenance-based defect clusters.
//!
//! Two defects share a cluster when they are connected through error events
//! that touched a common plaquette, or through a move that merged one defect
//! into another. The tracker remembers every plaquette an error ever touched,
//! so a later error landing on an already-cleared plaquette still joins the
//! cluster that plaquette belonged to. Unions are never undone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Plaquette, SyndromeState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("centre of an empty cluster is undefined")]
    EmptyCluster,
    #[error("illegal move: no defect at {0}")]
    EmptySource(Plaquette),
}

/// A live cluster: at least one member with nonzero charge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: u64,
    /// Members in row-major order.
    pub members: Vec<(Plaquette, u32)>,
    pub value_sum: u32,
    pub neutral: bool,
    pub centre: Plaquette,
}

impl Cluster {
    pub fn from_members(id: u64, mut members: Vec<(Plaquette, u32)>, d: u32) -> Result<Self, ClusterError> {
        members.sort();
        let positions: Vec<_> = members.iter().map(|&(p, _)| p).collect();
        let centre = centroid(&positions)?;
        let value_sum = sum_mod(members.iter().map(|&(_, v)| v), d);
        Ok(Self {
            id,
            members,
            value_sum,
            neutral: value_sum == 0,
            centre,
        })
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

fn sum_mod(values: impl IntoIterator<Item = u32>, d: u32) -> u32 {
    let d = d as u64;
    (values.into_iter().map(|v| v as u64 % d).sum::<u64>() % d) as u32
}

/// True iff the values would annihilate if combined.
pub fn is_neutral(values: &[u32], d: u32) -> bool {
    sum_mod(values.iter().copied(), d) == 0
}

/// Component-wise lower median of the member coordinates.
///
/// The result minimises the summed Manhattan distance to all members; for an
/// even number of coordinates the lower of the two middle values is taken.
pub fn centroid(members: &[Plaquette]) -> Result<Plaquette, ClusterError> {
    if members.is_empty() {
        return Err(ClusterError::EmptyCluster);
    }
    let mut rows: Vec<_> = members.iter().map(|p| p.row).collect();
    let mut cols: Vec<_> = members.iter().map(|p| p.col).collect();
    rows.sort_unstable();
    cols.sort_unstable();
    let mid = (members.len() - 1) / 2;
    Ok(Plaquette::new(rows[mid], cols[mid]))
}

/// Destination of a move: another plaquette or one of the absorbing sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveDestination {
    Plaquette(Plaquette),
    Boundary,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceTracker {
    parent: Vec<u64>,
    owner: BTreeMap<Plaquette, u64>,
}

impl ProvenanceTracker {
    pub fn new() -> Self {
        Self::default()
    }

    fn make_node(&mut self) -> u64 {
        let id = self.parent.len() as u64;
        self.parent.push(id);
        id
    }

    fn find(&self, mut x: u64) -> u64 {
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    fn find_compress(&mut self, x: u64) -> u64 {
        let root = self.find(x);
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Smaller id stays the root, so a cluster's id is its oldest node.
    fn union(&mut self, a: u64, b: u64) -> u64 {
        let ra = self.find_compress(a);
        let rb = self.find_compress(b);
        let (keep, drop) = if ra <= rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop as usize] = keep;
        keep
    }

    /// Cluster id currently associated with `p`, if any error or move ever
    /// reached it.
    pub fn cluster_of(&self, p: Plaquette) -> Option<u64> {
        self.owner.get(&p).map(|&n| self.find(n))
    }

    /// Unions the plaquettes touched by an error with every cluster already
    /// associated with them.
    pub fn record_error(&mut self, touched: &[Plaquette]) -> u64 {
        let mut root: Option<u64> = None;
        for p in touched {
            if let Some(&n) = self.owner.get(p) {
                root = Some(match root {
                    None => self.find_compress(n),
                    Some(r) => self.union(r, n),
                });
            }
        }
        let root = match root {
            Some(r) => r,
            None => self.make_node(),
        };
        for &p in touched {
            self.owner.entry(p).or_insert(root);
        }
        self.find_compress(root)
    }

    /// Updates clusters for a move of the defect at `from`. `before` is the
    /// syndrome prior to applying the move.
    pub fn record_move(
        &mut self,
        from: Plaquette,
        to: MoveDestination,
        before: &SyndromeState,
    ) -> Result<(), ClusterError> {
        if before.get(from) == 0 {
            return Err(ClusterError::EmptySource(from));
        }
        let source = match self.owner.get(&from) {
            Some(&n) => self.find_compress(n),
            None => {
                let n = self.make_node();
                self.owner.insert(from, n);
                n
            }
        };
        if let MoveDestination::Plaquette(t) = to {
            match self.owner.get(&t).copied() {
                Some(n) if before.get(t) != 0 => {
                    self.union(source, n);
                }
                _ => {
                    self.owner.insert(t, source);
                }
            }
        }
        Ok(())
    }

    /// Live clusters (those with at least one defect), ordered by id.
    pub fn clusters(&self, syndrome: &SyndromeState) -> Vec<Cluster> {
        let d = syndrome.spec().d;
        let mut groups: BTreeMap<u64, Vec<(Plaquette, u32)>> = BTreeMap::new();
        let mut orphan = self.parent.len() as u64;
        for (p, v) in syndrome.defects() {
            let id = self.cluster_of(p).unwrap_or_else(|| {
                // Defects the tracker never saw each form their own cluster.
                orphan += 1;
                orphan
            });
            groups.entry(id).or_default().push((p, v));
        }
        groups
            .into_iter()
            .map(|(id, members)| Cluster::from_members(id, members, d).expect("nonempty group"))
            .collect()
    }
}
