//! Benchmark fixtures shared by the criterion targets.

use decodoku_core::lattice::bordering_plaquettes;
use decodoku_core::noise::{generate_instance, stream_rng};
use decodoku_core::{ErrorEvent, LatticeSpec, NoiseSpec, ProvenanceTracker, SyndromeState};

/// A seeded static instance on an `l x l` lattice with d = 10.
pub fn instance(l: usize, p: f64, seed: u64) -> (LatticeSpec, Vec<ErrorEvent>) {
    let spec = LatticeSpec::square(l, 10).expect("valid lattice");
    let noise = NoiseSpec {
        p,
        seed,
        ..NoiseSpec::default()
    };
    let errors = generate_instance(&spec, &noise, &mut stream_rng(seed, 0), 0);
    (spec, errors)
}

/// Syndrome and provenance for a static instance.
pub fn board(l: usize, p: f64, seed: u64) -> (SyndromeState, ProvenanceTracker) {
    let (spec, errors) = instance(l, p, seed);
    let mut s = SyndromeState::new(spec);
    let mut t = ProvenanceTracker::new();
    for e in &errors {
        let touched: Vec<_> = bordering_plaquettes(e.qudit, &spec)
            .expect("generated qudits are valid")
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        s.apply_shift(e.qudit, e.magnitude).expect("valid magnitude");
        t.record_error(&touched);
    }
    (s, t)
}
