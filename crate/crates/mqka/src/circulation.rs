//! Discrete-period engine for circulating-sequence protocols (circle and
//! half-circle). One period = every alive sequence moves one hop; the new
//! holder verifies the inbound decoy batch, encodes, inserts a fresh batch
//! and forwards. Attack plans overlay early measurements (key stealing),
//! forged encodings (key flipping), fixed encoding overrides and in-transit
//! blind flips onto the same timetable, so a controlled run produces a
//! transcript shaped exactly like an honest one.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::key::{forged_key, xor_fold, Key};
use crate::outcome::{DetectionEvent, MoveRecord, RunOutcome, Verdict};
use crate::quantum::SequencePair;
use crate::topology::{Topology, TopologyKind};

/// Which of an owner's sequences this is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Leg {
    /// The single full-circle sequence.
    Full,
    /// Half-circle: runs through the successors.
    Forward,
    /// Half-circle: runs through the predecessors.
    Backward,
}

impl Leg {
    fn label(self) -> &'static str {
        match self {
            Leg::Full => "full",
            Leg::Forward => "fwd",
            Leg::Backward => "back",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct SeqId {
    pub owner: usize,
    pub leg: Leg,
}

/// Everything the dishonest side does on top of the honest timetable.
#[derive(Debug, Clone, Default)]
pub(crate) struct CirculationPlan {
    pub colluders: BTreeSet<usize>,
    pub expected: Option<Key>,
    /// Sequences whose home half and descriptor are handed to another
    /// colluder during setup (the position swap).
    pub home_swaps: BTreeMap<SeqId, usize>,
    /// sequence -> (period, measurer): joint-measure on arrival, pooling the
    /// partial XOR, then forward a fresh replacement pair.
    pub steals: BTreeMap<SeqId, (usize, usize)>,
    /// sequence -> (period, flipper): encode the forged key instead of the
    /// personal key at that turn.
    pub flips: BTreeMap<SeqId, (usize, usize)>,
    /// (sequence, period) -> fixed key to encode instead of the personal key.
    pub encode_overrides: BTreeMap<(SeqId, usize), Key>,
    /// (sequence, period) -> mask: blind-flip the sequence in transit, before
    /// the period's detection stage.
    pub intercepts: BTreeMap<(SeqId, usize), Key>,
    /// First period at which the colluders have pooled the full final key.
    pub steal_complete: usize,
}

impl CirculationPlan {
    pub fn honest() -> Self {
        CirculationPlan::default()
    }
}

struct SeqState {
    id: SeqId,
    /// Holder in period t is `itinerary[t-1]`; the last entry is the owner.
    itinerary: Vec<usize>,
    pair: Option<SequencePair>,
    home_value: Option<Key>,
    /// Honest participants who have encoded (always their personal key).
    honest_encoders: BTreeSet<usize>,
    /// Values colluders have encoded into this sequence so far.
    colluder_values: Vec<Key>,
}

fn itineraries(topo: &Topology) -> Result<Vec<(SeqId, Vec<usize>)>> {
    let n = topo.n;
    let mut out = Vec::new();
    match topo.kind {
        TopologyKind::Circle => {
            for owner in 0..n {
                let mut it: Vec<usize> = (1..n).map(|k| (owner + k) % n).collect();
                it.push(owner);
                out.push((SeqId { owner, leg: Leg::Full }, it));
            }
        }
        TopologyKind::HalfCircle => {
            let (fwd, back) = topo.half_arcs();
            for owner in 0..n {
                let mut f: Vec<usize> = (1..=fwd).map(|k| (owner + k) % n).collect();
                f.push(owner);
                out.push((SeqId { owner, leg: Leg::Forward }, f));
                let mut b: Vec<usize> = (1..=back).map(|k| (owner + n - k) % n).collect();
                b.push(owner);
                out.push((SeqId { owner, leg: Leg::Backward }, b));
            }
        }
        _ => {
            return Err(Error::structural(format!(
                "{} is not a circulating-sequence topology",
                topo.kind
            )))
        }
    }
    Ok(out)
}

/// Periods at which each colluder holds one of `owner`'s sequences and could
/// encode into it, as `(period, sequence, colluder)`, excluding home arrivals.
pub(crate) fn colluder_turns(
    topo: &Topology,
    owner: usize,
    colluders: &BTreeSet<usize>,
) -> Vec<(usize, Leg, usize)> {
    let n = topo.n;
    let mut turns = Vec::new();
    match topo.kind {
        TopologyKind::Circle => {
            for &c in colluders {
                if c != owner {
                    turns.push(((c + n - owner) % n, Leg::Full, c));
                }
            }
        }
        TopologyKind::HalfCircle => {
            let (fwd, back) = topo.half_arcs();
            for &c in colluders {
                if c == owner {
                    continue;
                }
                let df = (c + n - owner) % n;
                if df <= fwd {
                    turns.push((df, Leg::Forward, c));
                }
                let db = (owner + n - c) % n;
                if db <= back {
                    turns.push((db, Leg::Backward, c));
                }
            }
        }
        _ => {}
    }
    turns.sort_unstable();
    turns
}

pub(crate) fn run_circulation(
    topo: &Topology,
    keys: &[Key],
    decoys_per_hop: usize,
    plan: &CirculationPlan,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    let n = topo.n;
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
    if let Some(e) = &plan.expected {
        if e.len() != len {
            return Err(Error::structural("expected key length mismatch"));
        }
    }

    let mut seqs: Vec<SeqState> = itineraries(topo)?
        .into_iter()
        .map(|(id, itinerary)| SeqState {
            id,
            itinerary,
            pair: None,
            home_value: None,
            honest_encoders: BTreeSet::new(),
            colluder_values: Vec::new(),
        })
        .collect();

    // Setup: generate pairs, perform the colluders' position swaps, insert
    // the first decoy batch and send the traveling halves on their way.
    for s in &mut seqs {
        let mut pair = SequencePair::generate(s.id.owner, len, rng);
        if let Some(&to) = plan.home_swaps.get(&s.id) {
            pair.transfer_home(to);
            pair.share_descriptor(to);
        }
        pair.insert_decoys(decoys_per_hop, s.id.owner, rng)?;
        pair.send_to(s.itinerary[0]);
        s.pair = Some(pair);
    }

    let t_max = seqs.iter().map(|s| s.itinerary.len()).max().unwrap_or(0);
    let mut detections: Vec<DetectionEvent> = Vec::new();
    let mut trace: Vec<MoveRecord> = Vec::new();
    // Learned partial XORs of honest personal keys: (who is covered, value).
    let mut captures: Vec<(BTreeSet<usize>, Key)> = Vec::new();
    let mut pooled_final: Option<Key> = None;

    for period in 1..=t_max {
        // First pass: arrivals. In-transit tampering lands, the inbound decoy
        // batch is verified, scheduled steals and home measurements happen.
        for s in &mut seqs {
            if period > s.itinerary.len() {
                continue;
            }
            let holder = s.itinerary[period - 1];
            let from = if period == 1 {
                s.id.owner
            } else {
                s.itinerary[period - 2]
            };

            if let Some(mask) = plan.intercepts.get(&(s.id, period)) {
                s.pair.as_mut().unwrap().blind_flip(mask)?;
            }

            let pair = s.pair.as_mut().unwrap();
            pair.reveal_decoys(holder);
            let check = pair.reveal_and_verify(holder)?;
            trace.push(MoveRecord {
                period,
                sequence_owner: s.id.owner,
                leg: s.id.leg.label().to_string(),
                from,
                to: holder,
                decoys_checked: check.checked,
                decoys_failed: check.failures,
            });
            if check.failures > 0 {
                detections.push(DetectionEvent {
                    period,
                    from,
                    to: holder,
                    failed: check.failures,
                });
                return Ok(RunOutcome {
                    final_keys: BTreeMap::new(),
                    detections,
                    verdict: Verdict::Aborted,
                    trace,
                });
            }

            let at_home = period == s.itinerary.len();

            // Key stealing: the designated colluder holds both halves now and
            // extracts the partial XOR exactly as the owner would at home.
            if plan.steals.get(&s.id) == Some(&(period, holder)) {
                let measured = s.pair.take().unwrap().joint_measure(holder)?;
                let mut honest_part = measured;
                for v in &s.colluder_values {
                    honest_part.xor_in_place(v)?;
                }
                captures.push((s.honest_encoders.clone(), honest_part));
                if !at_home {
                    // Replace with a fresh pair so the circulation, decoy
                    // batches included, looks untouched downstream.
                    let mut repl = SequencePair::generate(s.id.owner, len, rng);
                    repl.transfer_home(holder);
                    repl.share_descriptor(holder);
                    repl.send_to(holder);
                    s.pair = Some(repl);
                }
            } else if at_home {
                let pair = s.pair.take().unwrap();
                if pair.can_joint_measure(holder) {
                    s.home_value = Some(pair.joint_measure(holder)?);
                }
            }
        }

        // The colluders pool the legal final key over their instantaneous
        // classical channel as soon as the last capture is in.
        if pooled_final.is_none()
            && plan.expected.is_some()
            && !plan.steals.is_empty()
            && period >= plan.steal_complete
            && captures.len() == plan.steals.len()
        {
            pooled_final = Some(pool_final_key(n, keys, &plan.colluders, &captures)?);
        }

        // Second pass: every holder that is not at an endpoint encodes,
        // inserts a fresh decoy batch and forwards.
        for s in &mut seqs {
            if period >= s.itinerary.len() || s.pair.is_none() {
                continue;
            }
            let holder = s.itinerary[period - 1];
            let encoding = if let Some(k) = plan.encode_overrides.get(&(s.id, period)) {
                k.clone()
            } else if plan.flips.get(&s.id) == Some(&(period, holder)) {
                let final_key = pooled_final.as_ref().ok_or_else(|| {
                    Error::violation(format!(
                        "flip scheduled in period {period} before the final key is known"
                    ))
                })?;
                forged_key(&keys[holder], plan.expected.as_ref().unwrap(), final_key)?
            } else {
                keys[holder].clone()
            };

            let pair = s.pair.as_mut().unwrap();
            pair.encode(&encoding, holder)?;
            if plan.colluders.contains(&holder) {
                s.colluder_values.push(encoding);
            } else {
                s.honest_encoders.insert(holder);
            }
            pair.insert_decoys(decoys_per_hop, holder, rng)?;
            pair.send_to(s.itinerary[period]);
        }
    }

    // Final keys: honest participants fold their own measurement(s) with
    // their personal key; colluders under an active plan output the key they
    // set out to enforce.
    let mut final_keys: BTreeMap<usize, Key> = BTreeMap::new();
    for id in 0..n {
        if plan.colluders.contains(&id) {
            if let Some(e) = &plan.expected {
                final_keys.insert(id, e.clone());
                continue;
            }
        }
        let mut acc = keys[id].clone();
        for s in seqs.iter().filter(|s| s.id.owner == id) {
            let hv = s.home_value.as_ref().ok_or_else(|| {
                Error::violation(format!(
                    "participant {id} could not measure their own sequence"
                ))
            })?;
            acc.xor_in_place(hv)?;
        }
        final_keys.insert(id, acc);
    }

    let verdict = match &plan.expected {
        Some(e)
            if !plan.colluders.is_empty()
                && (0..n)
                    .filter(|i| !plan.colluders.contains(i))
                    .all(|i| final_keys[&i] == *e) =>
        {
            Verdict::Controlled(plan.colluders.clone())
        }
        _ => Verdict::Fair,
    };

    Ok(RunOutcome {
        final_keys,
        detections,
        verdict,
        trace,
    })
}

/// What the colluders can reconstruct: the XOR of all captured honest
/// partials and their own personal keys. The captures must cover each honest
/// participant exactly once; the result then equals the legal final key.
fn pool_final_key(
    n: usize,
    keys: &[Key],
    colluders: &BTreeSet<usize>,
    captures: &[(BTreeSet<usize>, Key)],
) -> Result<Key> {
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let mut acc = Key::zero(keys[0].len());
    for (set, value) in captures {
        if !covered.is_disjoint(set) {
            return Err(Error::violation("overlapping steal captures"));
        }
        covered.extend(set);
        acc.xor_in_place(value)?;
    }
    let honest: BTreeSet<usize> = (0..n).filter(|i| !colluders.contains(i)).collect();
    if covered != honest {
        return Err(Error::violation(
            "steal captures do not cover all honest participants",
        ));
    }
    for &c in colluders {
        acc.xor_in_place(&keys[c])?;
    }
    debug_assert_eq!(acc, xor_fold(keys)?);
    Ok(acc)
}
