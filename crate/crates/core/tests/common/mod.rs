//! Independent oracles shared by the property and acceptance suites.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use decodoku_core::lattice::{bordering_plaquettes, CorrectionLedger, QuditId};
use decodoku_core::pairrank::{DefectFeatures, PairFeatures};
use decodoku_core::{ErrorEvent, LatticeSpec, Plaquette, SyndromeState};
use rand::Rng;

/// Brute-force minimiser of summed Manhattan distance over the whole grid.
/// Returns the minimum and every grid point attaining it.
pub fn manhattan_minimisers(members: &[Plaquette], rows: usize, cols: usize) -> (usize, Vec<Plaquette>) {
    let mut best = usize::MAX;
    let mut at = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let p = Plaquette::new(r, c);
            let cost: usize = members.iter().map(|m| m.manhattan(p)).sum();
            match cost.cmp(&best) {
                Ordering::Less => {
                    best = cost;
                    at = vec![p];
                }
                Ordering::Equal => at.push(p),
                Ordering::Greater => {}
            }
        }
    }
    (best, at)
}

/// Rule-by-rule ranking comparator written without the library's key
/// tuples. `Less` means `x` ranks higher.
pub fn oracle_compare(x: &PairFeatures, y: &PairFeatures) -> Ordering {
    // Rule 1: same cluster first.
    if x.same_cluster && !y.same_cluster {
        return Ordering::Less;
    }
    if !x.same_cluster && y.same_cluster {
        return Ordering::Greater;
    }
    // Rules 2 and 3: near (< 4) before far; near ascending, far descending.
    let x_near = x.distance < 4;
    let y_near = y.distance < 4;
    if x_near && !y_near {
        return Ordering::Less;
    }
    if !x_near && y_near {
        return Ordering::Greater;
    }
    if x.distance != y.distance {
        let x_better = if x_near {
            x.distance < y.distance
        } else {
            x.distance > y.distance
        };
        return if x_better {
            Ordering::Less
        } else {
            Ordering::Greater
        };
    }
    // Rule 4: larger distance via the centres first.
    if x.via_centre != y.via_centre {
        return if x.via_centre > y.via_centre {
            Ordering::Less
        } else {
            Ordering::Greater
        };
    }
    // Rule 5: exactly one with neighbours, then neither, then both.
    let category = |p: &PairFeatures| {
        let a = p.a_neighbours > 0;
        let b = p.b_neighbours > 0;
        if a != b {
            0
        } else if !a {
            1
        } else {
            2
        }
    };
    let (cx, cy) = (category(x), category(y));
    if cx != cy {
        return if cx < cy {
            Ordering::Less
        } else {
            Ordering::Greater
        };
    }
    // Final tie-break: row-major order of the (smaller, larger) positions.
    let key = |p: &PairFeatures| {
        let (u, v) = if p.a.position < p.b.position {
            (p.a.position, p.b.position)
        } else {
            (p.b.position, p.a.position)
        };
        (u.row, u.col, v.row, v.col)
    };
    key(x).cmp(&key(y))
}

fn random_defect<R: Rng>(rng: &mut R, position: Plaquette) -> DefectFeatures {
    DefectFeatures {
        position,
        value: rng.gen_range(1..10),
        cluster_id: rng.gen_range(0..4),
        cluster_size: rng.gen_range(1..6),
        cluster_centre: Plaquette::new(rng.gen_range(0..8), rng.gen_range(0..8)),
        neighbour_count: rng.gen_range(0..4),
    }
}

/// Synthetic pair features with distinct position pairs. Feature values are
/// drawn from small ranges so that every rule gets exercised by ties.
pub fn random_pair_set<R: Rng>(rng: &mut R, n: usize) -> Vec<PairFeatures> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let a = Plaquette::new(rng.gen_range(0..8), rng.gen_range(0..8));
        let b = Plaquette::new(rng.gen_range(0..8), rng.gen_range(0..8));
        if a >= b || !seen.insert((a, b)) {
            continue;
        }
        let distance = a.manhattan(b);
        let fa = random_defect(rng, a);
        let fb = random_defect(rng, b);
        let annihilates = rng.gen_bool(0.3);
        out.push(PairFeatures {
            a: fa,
            b: fb,
            distance,
            same_cluster: rng.gen_bool(0.5),
            via_centre: rng.gen_range(0..6),
            annihilates,
            helpful_neighbours: if annihilates { 0 } else { rng.gen_range(0..3) },
            a_neighbours: rng.gen_range(0..3),
            b_neighbours: rng.gen_range(0..3),
        });
    }
    out
}

pub fn random_error<R: Rng>(rng: &mut R, spec: &LatticeSpec, id: u64) -> ErrorEvent {
    let qudits: Vec<QuditId> = spec.qudits().collect();
    ErrorEvent {
        qudit: qudits[rng.gen_range(0..qudits.len())],
        magnitude: rng.gen_range(1..spec.d),
        event_id: id,
    }
}

/// Connected components of defects in the error/plaquette incidence graph,
/// as a set of defect sets.
pub fn incidence_partition(spec: &LatticeSpec, errors: &[ErrorEvent]) -> BTreeSet<BTreeSet<Plaquette>> {
    // Plain BFS over an adjacency list: plaquette <-> error.
    let mut by_plaquette: BTreeMap<Plaquette, Vec<usize>> = BTreeMap::new();
    let touched: Vec<Vec<Plaquette>> = errors
        .iter()
        .map(|e| {
            bordering_plaquettes(e.qudit, spec)
                .unwrap()
                .into_iter()
                .map(|(p, _)| p)
                .collect()
        })
        .collect();
    for (i, ps) in touched.iter().enumerate() {
        for p in ps {
            by_plaquette.entry(*p).or_default().push(i);
        }
    }
    let syndrome = SyndromeState::from_errors(*spec, errors).unwrap();
    let defects: BTreeSet<Plaquette> = syndrome.defects().into_iter().map(|(p, _)| p).collect();
    let mut seen = BTreeSet::new();
    let mut parts = BTreeSet::new();
    for &start in &defects {
        if seen.contains(&start) {
            continue;
        }
        let mut part = BTreeSet::new();
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(p) = stack.pop() {
            if defects.contains(&p) {
                part.insert(p);
            }
            for &e in by_plaquette.get(&p).into_iter().flatten() {
                for &q in &touched[e] {
                    if seen.insert(q) {
                        stack.push(q);
                    }
                }
            }
        }
        parts.insert(part);
    }
    parts
}

/// Clears a syndrome by carrying every defect along its row and off the left
/// side. Independent of the decoders under test.
pub fn push_everything_left(syndrome: &SyndromeState) -> CorrectionLedger {
    let spec = *syndrome.spec();
    let d = spec.d;
    let mut ledger = CorrectionLedger::new();
    for (p, v) in syndrome.defects() {
        // Interior edge (r, c) adds +k on (r, c-1) and -k on (r, c); moving
        // charge v one step left therefore needs k = v.
        for c in (1..=p.col).rev() {
            ledger.add(QuditId::horizontal(p.row, c), v, d);
        }
        // Left edge adds +k on column 0; removing v needs k = d - v.
        ledger.add(QuditId::horizontal(p.row, 0), d - v, d);
    }
    ledger
}
