//! Decoding laboratory for planar Z_d surface codes.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: plaquette grid, qudit coordinates, syndrome arithmetic and
//!   the cut-flux logical check.
//! * [`noise`]: static error instances and the dynamic spawn process.
//! * [`cluster`]: provenance-tracked defect clusters and Manhattan medians.
//! * [`pairrank`]: the pair-ranking bot used for play and for suggestions.
//! * [`hdrg`]: the neutral-cluster renormalisation decoder.
//! * [`game`]: dynamic and puzzle game engine.
//! * [`savefile`]: the text save format and deterministic replay.
//! * [`experiment`]: seeded Monte Carlo campaigns with CSV output.

pub mod cluster;
pub mod experiment;
pub mod game;
pub mod hdrg;
pub mod lattice;
pub mod noise;
pub mod pairrank;
pub mod savefile;
pub mod stats;

pub use cluster::{centroid, is_neutral, Cluster, ProvenanceTracker};
pub use game::{GameConfig, GameError, GameState, Mode, Move, MoveRecord, Status, Target, Verdict};
pub use hdrg::{hdrg_decode, ClusterState};
pub use lattice::{
    CorrectionLedger, ErrorEvent, LatticeError, LatticeSpec, Orientation, Plaquette, QuditId, SyndromeState,
};
pub use noise::{MagnitudeDist, NoiseSpec};
pub use pairrank::{DefectFeatures, PairFeatures, RankOptions};
pub use savefile::SaveDocument;
