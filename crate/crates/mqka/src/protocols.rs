//! Honest executions of the three protocol archetypes.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::circulation::{run_circulation, CirculationPlan};
use crate::error::{Error, Result};
use crate::key::{xor_fold, Key};
use crate::outcome::{MoveRecord, RunOutcome, Verdict};
use crate::quantum::SequencePair;
use crate::topology::{Topology, TopologyKind};

/// Complete-graph type: every participant delivers their personal key to each
/// other participant over a decoy-protected channel; everyone folds all N
/// keys. Modeled at the information level, one sequence pair per ordered pair
/// of participants.
pub fn run_cgt(n: usize, keys: &[Key], d: usize, rng: &mut impl Rng) -> Result<RunOutcome> {
    Topology::new(TopologyKind::CompleteGraph, n)?;
    check_keys(n, keys)?;
    let len = keys[0].len();

    let mut received: BTreeMap<usize, Vec<Key>> = (0..n).map(|i| (i, Vec::new())).collect();
    let mut trace = Vec::new();
    for sender in 0..n {
        for receiver in 0..n {
            if sender == receiver {
                continue;
            }
            let mut pair = SequencePair::generate(sender, len, rng);
            pair.encode(&keys[sender], sender)?;
            pair.insert_decoys(d, sender, rng)?;
            pair.transfer_home(receiver);
            pair.share_descriptor(receiver);
            pair.send_to(receiver);
            pair.reveal_decoys(receiver);
            let check = pair.reveal_and_verify(receiver)?;
            trace.push(MoveRecord {
                period: 1,
                sequence_owner: sender,
                leg: "direct".to_string(),
                from: sender,
                to: receiver,
                decoys_checked: check.checked,
                decoys_failed: check.failures,
            });
            let delivered = pair.joint_measure(receiver)?;
            received.get_mut(&receiver).unwrap().push(delivered);
        }
    }

    let mut final_keys = BTreeMap::new();
    for i in 0..n {
        let mut all = received.remove(&i).unwrap();
        all.push(keys[i].clone());
        final_keys.insert(i, xor_fold(&all)?);
    }
    Ok(RunOutcome {
        final_keys,
        detections: Vec::new(),
        verdict: Verdict::Fair,
        trace,
    })
}

/// Circle type: the N-period schedule. Every participant's final key equals
/// the XOR of all personal keys; any decoy failure aborts the run.
pub fn run_circle(n: usize, keys: &[Key], d: usize, rng: &mut impl Rng) -> Result<RunOutcome> {
    let topo = Topology::new(TopologyKind::Circle, n)?;
    check_keys(n, keys)?;
    let outcome = run_circulation(&topo, keys, d, &CirculationPlan::honest(), rng)?;
    abort_on_detection(outcome)
}

/// Half-circle variant: two sequences per participant, each covering half of
/// the circle before returning home.
pub fn run_half_circle(n: usize, keys: &[Key], d: usize, rng: &mut impl Rng) -> Result<RunOutcome> {
    let topo = Topology::new(TopologyKind::HalfCircle, n)?;
    check_keys(n, keys)?;
    let outcome = run_circulation(&topo, keys, d, &CirculationPlan::honest(), rng)?;
    abort_on_detection(outcome)
}

fn abort_on_detection(outcome: RunOutcome) -> Result<RunOutcome> {
    if let Some(ev) = outcome.detections.first() {
        return Err(Error::DetectionAbort {
            period: ev.period,
            from: ev.from,
            to: ev.to,
            failed: ev.failed,
        });
    }
    Ok(outcome)
}

fn check_keys(n: usize, keys: &[Key]) -> Result<()> {
    if keys.len() != n {
        return Err(Error::structural(format!(
            "expected {n} personal keys, got {}",
            keys.len()
        )));
    }
    let len = keys[0].len();
    if keys.iter().any(|k| k.len() != len) {
        return Err(Error::structural("personal keys differ in length"));
    }
    Ok(())
}

/// A batch of N-party GHZ states prepared by the tree root. Measuring a shot
/// gives every party the same uniformly random bit.
#[derive(Debug, Clone)]
pub struct GhzRegister {
    parties: usize,
    bits: Vec<u8>,
}

impl GhzRegister {
    pub fn sample(parties: usize, shots: usize, rng: &mut impl Rng) -> Self {
        GhzRegister {
            parties,
            bits: (0..shots).map(|_| rng.gen_range(0..=1u8)).collect(),
        }
    }

    /// Fix the shared bits explicitly (used to replay specific patterns).
    pub fn with_bits(parties: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::structural("GHZ shot bits must be 0 or 1"));
        }
        Ok(GhzRegister { parties, bits })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn shots(&self) -> usize {
        self.bits.len()
    }

    /// What party `_id` reads when measuring shot `shot` in the computational
    /// basis: the same bit as everyone else.
    pub fn measure(&self, _id: usize, shot: usize) -> u8 {
        self.bits[shot]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
}

/// Tree type: the root distributes GHZ particles; each party sacrifices some
/// shots for correlation checks (picked in `order`, by id when `None`); the
/// first `key_shots` surviving shots form the shared key.
pub fn run_tree(
    n: usize,
    total_shots: usize,
    key_shots: usize,
    picks_per_party: &[usize],
    order: Option<&[usize]>,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    if picks_per_party.len() != n {
        return Err(Error::structural(format!(
            "expected {n} detection pick counts, got {}",
            picks_per_party.len()
        )));
    }
    let total_picks: usize = picks_per_party.iter().sum();
    if total_shots < key_shots + total_picks {
        return Err(Error::structural(format!(
            "{total_shots} shots cannot cover {key_shots} key bits plus {total_picks} detection picks"
        )));
    }
    let default_order: Vec<usize> = (0..n).collect();
    let order = order.unwrap_or(&default_order);

    let register = GhzRegister::sample(n, total_shots, rng);
    let mut detection: BTreeSet<usize> = BTreeSet::new();
    for &party in order {
        for _ in 0..picks_per_party[party] {
            loop {
                let shot = rng.gen_range(0..total_shots);
                if detection.insert(shot) {
                    // All parties measure and compare: GHZ correlation always
                    // holds in an honest run.
                    let reference = register.measure(party, shot);
                    debug_assert!((0..n).all(|p| register.measure(p, shot) == reference));
                    break;
                }
            }
        }
    }

    let survivors: Vec<u8> = (0..total_shots)
        .filter(|s| !detection.contains(s))
        .map(|s| register.measure(0, s))
        .take(key_shots)
        .collect();
    let key = Key::from_bits(&survivors)?;
    let final_keys = (0..n).map(|i| (i, key.clone())).collect();
    Ok(RunOutcome {
        final_keys,
        detections: Vec::new(),
        verdict: Verdict::Fair,
        trace: Vec::new(),
    })
}
