//! Run results shared by the honest protocol engines and the attack engine.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::key::Key;

/// Whether a participant follows the protocol or the collusion playbook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Honest,
    Colluder,
}

/// A participant in a run. Honest behavior is a pure function of the view the
/// engine feeds it; the personal key is the only private input.
#[derive(Debug, Clone)]
pub struct Participant {
    pub id: usize,
    pub personal_key: Key,
    pub role: Role,
}

/// One decoy-check failure, recorded just before the run aborts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub period: usize,
    pub from: usize,
    pub to: usize,
    pub failed: usize,
}

/// One hand-off in the period trace: which sequence moved where and how its
/// inbound decoy batch fared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub period: usize,
    pub sequence_owner: usize,
    /// "full", "fwd" or "back" depending on the topology.
    pub leg: String,
    pub from: usize,
    pub to: usize,
    pub decoys_checked: usize,
    pub decoys_failed: usize,
}

/// Final verdict of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "by", rename_all = "lowercase")]
pub enum Verdict {
    /// No party or coalition steered the key; honest output stands.
    Fair,
    /// Every honest participant ended up with the colluders' expected key and
    /// no decoy check failed.
    Controlled(BTreeSet<usize>),
    /// A decoy check failed and the run stopped.
    Aborted,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub final_keys: BTreeMap<usize, Key>,
    pub detections: Vec<DetectionEvent>,
    pub verdict: Verdict,
    pub trace: Vec<MoveRecord>,
}

impl RunOutcome {
    /// True when all recorded final keys are identical.
    pub fn unanimous(&self) -> Option<&Key> {
        let mut iter = self.final_keys.values();
        let first = iter.next()?;
        iter.all(|k| k == first).then_some(first)
    }
}
