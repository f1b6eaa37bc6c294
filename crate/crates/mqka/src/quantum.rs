//! Minimal symbolic quantum layer.
//!
//! States are not amplitude-simulated. An entangled sequence pair is a ledger
//! of the XOR of all encodings applied to its traveling half, readable only by
//! whoever holds both halves plus the preparation descriptor. Decoy states are
//! BB84 single qubits used purely as tamper evidence: a blind bit-flip leaves
//! X-basis eigenstates invariant and flips Z-basis eigenstates, so a flipped
//! decoy is caught with probability 1/2 per decoy.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::key::Key;

/// BB84 preparation/measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Z,
    X,
}

/// A single decoy qubit interleaved into a traveling sequence.
///
/// `slot` is the data-mask index that lands on this decoy's physical position
/// when a tamperer applies a logical flip mask to the whole sequence; the
/// physical decoy positions themselves are disjoint from the data positions.
#[derive(Debug, Clone)]
pub struct DecoyState {
    pub basis: Basis,
    pub eigenvalue: u8,
    pub preparer: usize,
    slot: usize,
    disturbed: bool,
    known_to: BTreeSet<usize>,
}

/// Result of measuring one batch of revealed decoys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionResult {
    pub checked: usize,
    pub failures: usize,
}

impl DetectionResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Opaque token identifying the initial entangled state of a pair. Measuring
/// the two halves is only meaningful to a party that possesses it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateDescriptor(u64);

/// One participant's entangled sequence: a retained home half and a traveling
/// half that accumulates XOR encodings and carries interleaved decoys.
#[derive(Debug, Clone)]
pub struct SequencePair {
    owner: usize,
    data_len: usize,
    descriptor: StateDescriptor,
    accumulated: Key,
    travel_holder: usize,
    home_holder: usize,
    descriptor_known_to: BTreeSet<usize>,
    pending_decoys: Vec<DecoyState>,
    revealed_to: Option<usize>,
}

impl SequencePair {
    /// Fresh pair with a zero encoding ledger and no decoys. Both halves start
    /// in the owner's hands; the same seed yields the same descriptor.
    pub fn generate(owner: usize, data_len: usize, rng: &mut impl Rng) -> Self {
        assert!(data_len >= 1, "sequence data length must be >= 1");
        SequencePair {
            owner,
            data_len,
            descriptor: StateDescriptor(rng.gen()),
            accumulated: Key::zero(data_len),
            travel_holder: owner,
            home_holder: owner,
            descriptor_known_to: BTreeSet::from([owner]),
            pending_decoys: Vec::new(),
            revealed_to: None,
        }
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn data_len(&self) -> usize {
        self.data_len
    }

    pub fn descriptor(&self) -> StateDescriptor {
        self.descriptor
    }

    pub fn travel_holder(&self) -> usize {
        self.travel_holder
    }

    pub fn pending_decoy_count(&self) -> usize {
        self.pending_decoys.len()
    }

    /// XOR `key` into the traveling half. Legitimate encoding: never touches
    /// the decoys (their positions were revealed during the detection stage
    /// that precedes encoding, so the encoder works around them).
    pub fn encode(&mut self, key: &Key, by: usize) -> Result<()> {
        if by != self.travel_holder {
            return Err(Error::violation(format!(
                "participant {by} tried to encode into a sequence held by {}",
                self.travel_holder
            )));
        }
        if key.len() != self.data_len {
            return Err(Error::structural(format!(
                "encoding length {} does not match sequence length {}",
                key.len(),
                self.data_len
            )));
        }
        self.accumulated.xor_in_place(key)
    }

    /// Interleave `count` fresh BB84 decoys at positions known only to `by`.
    pub fn insert_decoys(&mut self, count: usize, by: usize, rng: &mut impl Rng) -> Result<()> {
        if by != self.travel_holder {
            return Err(Error::violation(format!(
                "participant {by} tried to insert decoys into a sequence held by {}",
                self.travel_holder
            )));
        }
        if !self.pending_decoys.is_empty() {
            return Err(Error::violation(
                "previous decoy batch has not been verified yet",
            ));
        }
        for _ in 0..count {
            self.pending_decoys.push(DecoyState {
                basis: if rng.gen::<bool>() { Basis::Z } else { Basis::X },
                eigenvalue: rng.gen_range(0..=1),
                preparer: by,
                slot: rng.gen_range(0..self.data_len),
                disturbed: false,
                known_to: BTreeSet::from([by]),
            });
        }
        Ok(())
    }

    /// Publish the pending decoy positions to `to`, enabling verification.
    pub fn reveal_decoys(&mut self, to: usize) {
        for d in &mut self.pending_decoys {
            d.known_to.insert(to);
        }
        self.revealed_to = Some(to);
    }

    /// Measure each pending decoy in its preparation basis and compare with
    /// the prepared eigenvalue. Consumes the batch.
    pub fn reveal_and_verify(&mut self, by: usize) -> Result<DetectionResult> {
        if self.revealed_to != Some(by) {
            return Err(Error::violation(format!(
                "participant {by} tried to verify decoys before their positions were revealed"
            )));
        }
        let checked = self.pending_decoys.len();
        let failures = self.pending_decoys.iter().filter(|d| d.disturbed).count();
        self.pending_decoys.clear();
        self.revealed_to = None;
        Ok(DetectionResult { checked, failures })
    }

    /// Flip the traveling half according to `mask` without knowing the decoy
    /// positions. Data bits and decoys alike are hit: a decoy whose slot falls
    /// on a set mask bit is flipped, which disturbs it exactly when it was
    /// prepared in the Z basis.
    pub fn blind_flip(&mut self, mask: &Key) -> Result<()> {
        if mask.len() != self.data_len {
            return Err(Error::structural(format!(
                "flip mask length {} does not match sequence length {}",
                mask.len(),
                self.data_len
            )));
        }
        self.accumulated.xor_in_place(mask)?;
        for d in &mut self.pending_decoys {
            if mask.bit(d.slot) == 1 && d.basis == Basis::Z {
                d.disturbed = true;
            }
        }
        Ok(())
    }

    /// Hand the traveling half to the next participant.
    pub fn send_to(&mut self, to: usize) {
        self.travel_holder = to;
    }

    /// Hand over the retained home half (the colluders' period-1 swap).
    pub fn transfer_home(&mut self, to: usize) {
        self.home_holder = to;
    }

    /// Tell `to` what the initial states were.
    pub fn share_descriptor(&mut self, to: usize) {
        self.descriptor_known_to.insert(to);
    }

    /// Measure both halves jointly, revealing the XOR of all encodings applied
    /// so far and nothing about the individual summands. Consumes the pair.
    pub fn joint_measure(self, by: usize) -> Result<Key> {
        if by != self.travel_holder || by != self.home_holder {
            return Err(Error::violation(format!(
                "participant {by} does not hold both halves (travel: {}, home: {})",
                self.travel_holder, self.home_holder
            )));
        }
        if !self.descriptor_known_to.contains(&by) {
            return Err(Error::violation(format!(
                "participant {by} does not know the initial state of this sequence"
            )));
        }
        Ok(self.accumulated)
    }

    pub fn can_joint_measure(&self, by: usize) -> bool {
        by == self.travel_holder && by == self.home_holder && self.descriptor_known_to.contains(&by)
    }
}
