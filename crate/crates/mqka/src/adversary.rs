//! Collusive attack engine: feasibility analysis, the key-stealing and
//! key-flipping stages against the circle and half-circle schedules, and the
//! detection-bits-chosen attack against the tree protocol.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circulation::{colluder_turns, run_circulation, CirculationPlan, Leg, SeqId};
use crate::error::{Error, Result};
use crate::key::Key;
use crate::outcome::{RunOutcome, Verdict};
use crate::protocols::GhzRegister;
use crate::topology::{circular_gaps, Topology, TopologyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackVariant {
    TwoColluderCircle,
    MultiColluderCircle,
    HalfCircleThreeColluder,
    TreeDetectionChoice,
}

impl std::fmt::Display for AttackVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AttackVariant::TwoColluderCircle => "two-colluder-circle",
            AttackVariant::MultiColluderCircle => "multi-colluder-circle",
            AttackVariant::HalfCircleThreeColluder => "half-circle-three-colluder",
            AttackVariant::TreeDetectionChoice => "tree-detection-choice",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for AttackVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-colluder-circle" => Ok(AttackVariant::TwoColluderCircle),
            "multi-colluder-circle" => Ok(AttackVariant::MultiColluderCircle),
            "half-circle-three-colluder" => Ok(AttackVariant::HalfCircleThreeColluder),
            "tree-detection-choice" => Ok(AttackVariant::TreeDetectionChoice),
            other => Err(Error::config(format!("unknown attack variant: {other}"))),
        }
    }
}

/// The colluders' shared agreement: who they are, which playbook they run and
/// the key they want everyone to end up with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackPlan {
    pub variant: AttackVariant,
    pub colluders: BTreeSet<usize>,
    pub expected: Key,
}

impl AttackPlan {
    pub fn new(variant: AttackVariant, colluders: BTreeSet<usize>, expected: Key) -> Self {
        AttackPlan {
            variant,
            colluders,
            expected,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.colluders.iter().any(|&c| c >= n) {
            return Err(Error::config("colluder position out of range"));
        }
        let min = match self.variant {
            AttackVariant::HalfCircleThreeColluder => 3,
            _ => 2,
        };
        if self.colluders.len() < min {
            return Err(Error::config(format!(
                "{} needs at least {min} colluders",
                self.variant
            )));
        }
        if self.variant == AttackVariant::TwoColluderCircle && self.colluders.len() != 2 {
            return Err(Error::config("two-colluder-circle takes exactly 2 colluders"));
        }
        if self.colluders.len() >= n {
            return Err(Error::config("at least one participant must be honest"));
        }
        Ok(())
    }
}

/// A colluder placement on the circle can control the key iff no stretch of
/// honest participants between circularly adjacent colluders is longer than
/// floor((N+1)/2).
pub fn feasible(n: usize, colluders: &BTreeSet<usize>) -> Result<bool> {
    let gaps = circular_gaps(n, colluders)?;
    Ok(gaps.into_iter().max().unwrap_or(n) <= (n + 1) / 2)
}

/// Assign every honest-owned sequence exactly one flipper: the
/// earliest-opportunity colluder turn no earlier than `steal_period` (the
/// period in which the pooled final key becomes available). Returns
/// owner -> (flipping colluder, period).
pub fn flip_schedule(
    n: usize,
    colluders: &BTreeSet<usize>,
    steal_period: usize,
) -> Result<BTreeMap<usize, (usize, usize)>> {
    let topo = Topology::new(TopologyKind::Circle, n)?;
    if colluders.is_empty() || colluders.iter().any(|&c| c >= n) {
        return Err(Error::structural("invalid colluder set"));
    }
    let mut schedule = BTreeMap::new();
    for owner in (0..n).filter(|i| !colluders.contains(i)) {
        let slot = colluder_turns(&topo, owner, colluders)
            .into_iter()
            .find(|&(period, _, _)| period >= steal_period);
        match slot {
            Some((period, _, c)) => {
                schedule.insert(owner, (c, period));
            }
            None => {
                return Err(Error::Feasibility(format!(
                    "no colluder holds participant {owner}'s sequence at or after period \
                     {steal_period}"
                )))
            }
        }
    }
    Ok(schedule)
}

/// Steal events for circularly adjacent colluder pairs: each pair swaps home
/// halves and descriptors in setup, and the far end of each gap measures the
/// inbound colluder-owned sequence the period it arrives, capturing the XOR
/// of the honest keys in between. Returns (plan pieces, stealing period).
fn circle_steals(
    n: usize,
    colluders: &BTreeSet<usize>,
) -> (
    BTreeMap<SeqId, usize>,
    BTreeMap<SeqId, (usize, usize)>,
    usize,
) {
    let sorted: Vec<usize> = colluders.iter().copied().collect();
    let mut swaps = BTreeMap::new();
    let mut steals = BTreeMap::new();
    let mut steal_period = 0;
    for (idx, &c) in sorted.iter().enumerate() {
        let next = sorted[(idx + 1) % sorted.len()];
        let gap = (next + n - c) % n;
        if gap < 2 {
            continue; // adjacent colluders: nothing honest in between
        }
        let id = SeqId {
            owner: c,
            leg: Leg::Full,
        };
        swaps.insert(id, next);
        steals.insert(id, (gap, next));
        steal_period = steal_period.max(gap);
    }
    (swaps, steals, steal_period)
}

/// The full circle attack: position swap, arc-wise key stealing, pooling,
/// then one forged encoding per honest-owned sequence. An infeasible
/// placement errors out before anything runs.
pub fn run_collusive_circle(
    n: usize,
    keys: &[Key],
    plan: &AttackPlan,
    d: usize,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    plan.validate(n)?;
    if !matches!(
        plan.variant,
        AttackVariant::TwoColluderCircle | AttackVariant::MultiColluderCircle
    ) {
        return Err(Error::config("not a circle attack variant"));
    }
    if !feasible(n, &plan.colluders)? {
        return Err(Error::Feasibility(format!(
            "gaps {:?} exceed {}",
            circular_gaps(n, &plan.colluders)?,
            (n + 1) / 2
        )));
    }
    let topo = Topology::new(TopologyKind::Circle, n)?;
    let (home_swaps, steals, steal_period) = circle_steals(n, &plan.colluders);
    let flips = flip_schedule(n, &plan.colluders, steal_period)?
        .into_iter()
        .map(|(owner, (c, period))| {
            (
                SeqId {
                    owner,
                    leg: Leg::Full,
                },
                (period, c),
            )
        })
        .collect();
    let cplan = CirculationPlan {
        colluders: plan.colluders.clone(),
        expected: Some(plan.expected.clone()),
        home_swaps,
        steals,
        flips,
        steal_complete: steal_period,
        ..CirculationPlan::default()
    };
    run_circulation(&topo, keys, d, &cplan, rng)
}

/// What an infeasible colluder pair can still try: run the stealing stage,
/// flip whatever sequences they can reach legitimately, and blind-flip one
/// out-of-reach sequence in transit. The blind flip disturbs the in-flight
/// decoy batch, so the run aborts with probability 1 - (1/2)^d.
pub fn run_collusive_circle_forced(
    n: usize,
    keys: &[Key],
    plan: &AttackPlan,
    d: usize,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    plan.validate(n)?;
    if feasible(n, &plan.colluders)? {
        return Err(Error::config(
            "placement is feasible; use the regular circle attack",
        ));
    }
    let topo = Topology::new(TopologyKind::Circle, n)?;
    let (home_swaps, steals, steal_period) = circle_steals(n, &plan.colluders);

    let mut flips = BTreeMap::new();
    let mut unreachable = Vec::new();
    for owner in (0..n).filter(|i| !plan.colluders.contains(i)) {
        let slot = colluder_turns(&topo, owner, &plan.colluders)
            .into_iter()
            .find(|&(period, _, _)| period >= steal_period);
        match slot {
            Some((period, _, c)) => {
                flips.insert(
                    SeqId {
                        owner,
                        leg: Leg::Full,
                    },
                    (period, c),
                );
            }
            None => unreachable.push(owner),
        }
    }
    // Blind-flip a single unreachable sequence on its last hop home.
    let mut intercepts = BTreeMap::new();
    if let Some(&owner) = unreachable.first() {
        let mask = Key::from_bits(&vec![1u8; keys[0].len()])?;
        intercepts.insert(
            (
                SeqId {
                    owner,
                    leg: Leg::Full,
                },
                n,
            ),
            mask,
        );
    }
    let cplan = CirculationPlan {
        colluders: plan.colluders.clone(),
        expected: Some(plan.expected.clone()),
        home_swaps,
        steals,
        flips,
        intercepts,
        steal_complete: steal_period,
        ..CirculationPlan::default()
    };
    run_circulation(&topo, keys, d, &cplan, rng)
}

/// True when the colluders fit inside a closed semicircle: the arc spanning
/// them is no longer than half the circle. The boundary case (span exactly
/// N/2) counts as "minor": the stealing route then finishes too late to
/// leave any flipping slot.
pub fn all_in_minor_arc(n: usize, colluders: &BTreeSet<usize>) -> Result<bool> {
    let gaps = circular_gaps(n, colluders)?;
    let max_gap = gaps.into_iter().max().unwrap_or(0);
    Ok((n - max_gap) * 2 <= n)
}

struct HcRoute {
    seq: SeqId,
    period: usize,
    measurer: usize,
    swap_to: Option<usize>,
}

/// Steal routes for one half-circle colluder gap (from `a` to `b`, `gap`
/// hops), in preference order. A route must put both halves of a
/// colluder-owned sequence in colluder hands exactly when its ledger holds
/// the gap's interior and nothing else.
fn hc_gap_routes(n: usize, a: usize, b: usize, gap: usize, fwd: usize, back: usize) -> Vec<HcRoute> {
    let mut routes = Vec::new();
    let fa = SeqId {
        owner: a,
        leg: Leg::Forward,
    };
    let bb = SeqId {
        owner: b,
        leg: Leg::Backward,
    };
    if gap <= fwd {
        routes.push(HcRoute {
            seq: fa,
            period: gap,
            measurer: b,
            swap_to: Some(b),
        });
    }
    if gap <= back {
        routes.push(HcRoute {
            seq: bb,
            period: gap,
            measurer: a,
            swap_to: Some(a),
        });
    }
    // Home returns: the owner measures their own sequence, usable only when
    // the traveled arc is exactly the gap's interior.
    if gap == fwd + 1 {
        routes.push(HcRoute {
            seq: fa,
            period: fwd + 1,
            measurer: a,
            swap_to: None,
        });
    }
    if gap == back + 1 {
        routes.push(HcRoute {
            seq: bb,
            period: back + 1,
            measurer: b,
            swap_to: None,
        });
    }
    let _ = n;
    routes
}

/// Try to assemble a working half-circle attack: one steal route per colluder
/// gap plus a flip slot for every honest owner at or after the stealing
/// period. Returns None when no combination works.
fn plan_half_circle(topo: &Topology, colluders: &BTreeSet<usize>) -> Option<CirculationPlanPieces> {
    let n = topo.n;
    let (fwd, back) = topo.half_arcs();
    let sorted: Vec<usize> = colluders.iter().copied().collect();
    let mut per_gap: Vec<Vec<HcRoute>> = Vec::new();
    for (idx, &c) in sorted.iter().enumerate() {
        let next = sorted[(idx + 1) % sorted.len()];
        let gap = (next + n - c) % n;
        if gap < 2 {
            continue;
        }
        let routes = hc_gap_routes(n, c, next, gap, fwd, back);
        if routes.is_empty() {
            return None;
        }
        per_gap.push(routes);
    }

    let mut combos: Vec<Vec<&HcRoute>> = per_gap
        .iter()
        .map(|v| v.iter().collect::<Vec<_>>())
        .multi_cartesian_product()
        .collect();
    // Prefer the earliest-finishing stealing stage: it leaves the most room
    // for flips.
    combos.sort_by_key(|c| c.iter().map(|r| r.period).max().unwrap_or(0));

    'combo: for combo in combos {
        let steal_period = combo.iter().map(|r| r.period).max().unwrap_or(0);
        let mut flips = BTreeMap::new();
        for owner in (0..n).filter(|i| !colluders.contains(i)) {
            let slot = colluder_turns(topo, owner, colluders)
                .into_iter()
                .find(|&(period, _, _)| period >= steal_period);
            match slot {
                Some((period, leg, c)) => {
                    flips.insert(SeqId { owner, leg }, (period, c));
                }
                None => continue 'combo,
            }
        }
        let mut home_swaps = BTreeMap::new();
        let mut steals = BTreeMap::new();
        for r in combo {
            if let Some(to) = r.swap_to {
                home_swaps.insert(r.seq, to);
            }
            steals.insert(r.seq, (r.period, r.measurer));
        }
        return Some(CirculationPlanPieces {
            home_swaps,
            steals,
            flips,
            steal_complete: steal_period,
        });
    }
    None
}

struct CirculationPlanPieces {
    home_swaps: BTreeMap<SeqId, usize>,
    steals: BTreeMap<SeqId, (usize, usize)>,
    flips: BTreeMap<SeqId, (usize, usize)>,
    steal_complete: usize,
}

/// Half-circle collusion. When no stealing/flipping timetable exists (two
/// colluders, or three squeezed into one minor arc) the colluders have
/// nothing better than honest play, so the run comes out Fair.
pub fn run_halfcircle_attack(
    n: usize,
    keys: &[Key],
    plan: &AttackPlan,
    d: usize,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    if plan.variant != AttackVariant::HalfCircleThreeColluder
        && plan.colluders.len() != 2
    {
        return Err(Error::config("not a half-circle attack variant"));
    }
    if plan.colluders.iter().any(|&c| c >= n) || plan.colluders.len() >= n {
        return Err(Error::config("invalid colluder set"));
    }
    let topo = Topology::new(TopologyKind::HalfCircle, n)?;
    let cplan = match plan_half_circle(&topo, &plan.colluders) {
        Some(pieces) => CirculationPlan {
            colluders: plan.colluders.clone(),
            expected: Some(plan.expected.clone()),
            home_swaps: pieces.home_swaps,
            steals: pieces.steals,
            flips: pieces.flips,
            steal_complete: pieces.steal_complete,
            ..CirculationPlan::default()
        },
        None => CirculationPlan::honest(),
    };
    run_circulation(&topo, keys, d, &cplan, rng)
}

/// Given the measured bits of the still-unchecked shots (as (shot index,
/// bit)), choose `picks` of them to sacrifice as "detection" shots so that
/// the first `key_bits` survivors read as close to `expected` as possible.
/// Ties break to the lexicographically smallest shot set. Returns the chosen
/// shots and the resulting key.
pub fn choose_detection_shots(
    remaining: &[(usize, u8)],
    key_bits: usize,
    picks: usize,
    expected: &Key,
) -> Result<(Vec<usize>, Key)> {
    if expected.len() != key_bits {
        return Err(Error::structural("expected key length != key_bits"));
    }
    if remaining.len() < picks + key_bits {
        return Err(Error::structural(format!(
            "{} remaining shots cannot cover {picks} picks plus {key_bits} key bits",
            remaining.len()
        )));
    }
    let mut best: Option<(usize, Vec<usize>, Key)> = None;
    for combo in (0..remaining.len()).combinations(picks) {
        let discard: BTreeSet<usize> = combo.iter().copied().collect();
        let survivors: Vec<u8> = remaining
            .iter()
            .enumerate()
            .filter(|(i, _)| !discard.contains(i))
            .map(|(_, &(_, bit))| bit)
            .take(key_bits)
            .collect();
        let key = Key::from_bits(&survivors)?;
        let dist = (0..key_bits).filter(|&i| key.bit(i) != expected.bit(i)).count();
        // combinations() yields sets in lexicographic order, so the first
        // strictly better one is also the lex-smallest at its distance.
        if best.as_ref().map_or(true, |(b, _, _)| dist < *b) {
            let shots = combo.iter().map(|&i| remaining[i].0).collect();
            if dist == 0 {
                return Ok((shots, key));
            }
            best = Some((dist, shots, key));
        }
    }
    let (_, shots, key) = best.unwrap();
    Ok((shots, key))
}

/// Deterministic core of the tree attack: the honest party has already
/// sacrificed `honest_picks`; every other party is a colluder and picks one
/// "detection" shot each, chosen after measuring everything.
pub fn run_tree_attack_on_register(
    register: &GhzRegister,
    key_bits: usize,
    honest_first_picker: usize,
    honest_picks: &BTreeSet<usize>,
    expected: &Key,
) -> Result<RunOutcome> {
    let parties = register.parties();
    if honest_first_picker >= parties {
        return Err(Error::structural("honest picker out of range"));
    }
    let colluder_picks = parties - 1;
    let remaining: Vec<(usize, u8)> = (0..register.shots())
        .filter(|s| !honest_picks.contains(s))
        .map(|s| (s, register.measure(honest_first_picker, s)))
        .collect();
    let (chosen, key) = choose_detection_shots(&remaining, key_bits, colluder_picks, expected)?;
    let _ = chosen;

    let final_keys = (0..parties).map(|i| (i, key.clone())).collect();
    let colluders: BTreeSet<usize> = (0..parties).filter(|&p| p != honest_first_picker).collect();
    let verdict = if key == *expected {
        Verdict::Controlled(colluders)
    } else {
        Verdict::Fair
    };
    Ok(RunOutcome {
        final_keys,
        detections: Vec::new(),
        verdict,
        trace: Vec::new(),
    })
}

/// The detection-bits-chosen attack on the tree protocol: the honest party
/// picks their detection shot at random and first; the colluders then pick
/// theirs knowing every measurement outcome.
pub fn run_tree_attack(
    parties: usize,
    shots: usize,
    key_bits: usize,
    honest_first_picker: usize,
    expected: &Key,
    rng: &mut impl Rng,
) -> Result<RunOutcome> {
    if parties < 2 || honest_first_picker >= parties {
        return Err(Error::structural("need >= 2 parties and a valid picker"));
    }
    if shots < parties + key_bits {
        return Err(Error::structural(format!(
            "{shots} shots cannot cover {parties} detection picks plus {key_bits} key bits"
        )));
    }
    let register = GhzRegister::sample(parties, shots, rng);
    let mut honest_picks = BTreeSet::new();
    honest_picks.insert(rng.gen_range(0..shots));
    run_tree_attack_on_register(&register, key_bits, honest_first_picker, &honest_picks, expected)
}

/// Exhaustive fairness certificate for a lone circle attacker: over every
/// honest key assignment and every fixed-encoding strategy (the only
/// undetectable family — a blind flip risks the decoy check, and early
/// measurement needs a home half the attacker does not hold), no strategy
/// forces every honest output to the attacker's target for all assignments.
pub fn single_attacker_exhaustive(n: usize, len: usize, d: usize) -> Result<bool> {
    use rand::SeedableRng;
    let topo = Topology::new(TopologyKind::Circle, n)?;
    let honest_count = n - 1;
    let patterns = 1usize << (len * honest_count);
    let attacker = 0usize;
    let honest: Vec<usize> = (1..n).collect();

    for target_bits in 0..(1usize << len) {
        let expected = key_from_int(target_bits, len);
        for strategy in 0..patterns {
            let overrides: BTreeMap<(SeqId, usize), Key> = honest
                .iter()
                .enumerate()
                .map(|(idx, &owner)| {
                    let enc = key_from_int((strategy >> (idx * len)) & ((1 << len) - 1), len);
                    let period = (attacker + n - owner) % n;
                    (
                        (
                            SeqId {
                                owner,
                                leg: Leg::Full,
                            },
                            period,
                        ),
                        enc,
                    )
                })
                .collect();
            let mut controls_all = true;
            for assignment in 0..patterns {
                let mut keys = vec![Key::zero(len); n];
                for (idx, &owner) in honest.iter().enumerate() {
                    keys[owner] = key_from_int((assignment >> (idx * len)) & ((1 << len) - 1), len);
                }
                let plan = CirculationPlan {
                    colluders: [attacker].into_iter().collect(),
                    expected: Some(expected.clone()),
                    encode_overrides: overrides.clone(),
                    ..CirculationPlan::default()
                };
                let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(
                    (target_bits * patterns + strategy) as u64,
                );
                let out = run_circulation(&topo, &keys, d, &plan, &mut rng)?;
                if !matches!(out.verdict, Verdict::Controlled(_)) || !out.detections.is_empty() {
                    controls_all = false;
                    break;
                }
            }
            if controls_all {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn key_from_int(value: usize, len: usize) -> Key {
    let bits: Vec<u8> = (0..len).map(|i| ((value >> (len - 1 - i)) & 1) as u8).collect();
    Key::from_bits(&bits).unwrap()
}
