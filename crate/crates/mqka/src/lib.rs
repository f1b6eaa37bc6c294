//! Discrete-period simulator for multi-party quantum key agreement (MQKA)
//! protocols. Four transmission archetypes — complete graph, circle,
//! half-circle and GHZ tree — run honestly or under collusive attacks that
//! steal partial XORs mid-circulation and forge encodings so every honest
//! participant computes a key the colluders chose in advance, without a
//! single decoy check failing.
//!
//! The quantum layer is a toy symbolic model: sequences carry an XOR ledger,
//! decoys are BB84 states with book-kept bases, GHZ shots are shared random
//! bits. That is enough to reproduce the protocols' information flow,
//! detection statistics and attack feasibility boundaries exactly.

pub mod adversary;
mod circulation;
pub mod cli;
pub mod error;
pub mod key;
pub mod outcome;
pub mod protocols;
pub mod quantum;
pub mod report;
pub mod topology;

pub use adversary::{
    all_in_minor_arc, choose_detection_shots, feasible, flip_schedule, run_collusive_circle,
    run_collusive_circle_forced, run_halfcircle_attack, run_tree_attack, AttackPlan, AttackVariant,
};
pub use error::{Error, Result};
pub use key::{forged_key, xor_fold, Key};
pub use outcome::{DetectionEvent, MoveRecord, Role, RunOutcome, Verdict};
pub use protocols::{run_cgt, run_circle, run_half_circle, run_tree, GhzRegister};
pub use topology::{circular_gaps, Topology, TopologyKind};
