//! Cross-cutting attack-engine invariants beyond the acceptance gate.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use mqka::{
    feasible, flip_schedule, run_circle, run_collusive_circle, run_tree_attack, AttackPlan,
    AttackVariant, Error, Key, Verdict,
};

fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

fn random_keys(n: usize, len: usize, rng: &mut impl Rng) -> Vec<Key> {
    (0..n).map(|_| Key::random(len, rng)).collect()
}

/// The schedule builder and the closed-form predicate must agree: a flip
/// schedule starting at the widest gap exists exactly for feasible sets.
#[test]
fn flip_schedule_exists_iff_feasible() {
    for n in 3..=10usize {
        for mask in 1u32..(1 << n) {
            let colluders: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if colluders.len() < 2 || colluders.len() > n - 1 {
                continue;
            }
            let gaps = mqka::circular_gaps(n, &colluders).unwrap();
            let steal = gaps.iter().copied().max().unwrap();
            let result = flip_schedule(n, &colluders, steal);
            match (feasible(n, &colluders).unwrap(), result) {
                (true, Ok(sched)) => {
                    let honest: BTreeSet<usize> =
                        (0..n).filter(|i| !colluders.contains(i)).collect();
                    assert_eq!(sched.keys().copied().collect::<BTreeSet<_>>(), honest);
                    for (&owner, &(c, period)) in &sched {
                        assert!(colluders.contains(&c));
                        assert_eq!((owner + period) % n, c, "flipper must hold the sequence");
                        assert!(period >= steal && period < n);
                    }
                }
                (false, Err(Error::Feasibility(_))) => {}
                (f, r) => panic!("n={n} {colluders:?}: feasible={f} but schedule={r:?}"),
            }
        }
    }
}

/// 1000 seeded controlled runs with zero decoy failures anywhere.
#[test]
fn controlled_runs_are_undetectable() {
    let mut total_failures = 0usize;
    for seed in 0..1000u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let n = 5 + (seed % 4) as usize;
        let colluders = set(&[1, 1 + n / 2]);
        let keys = random_keys(n, 8, &mut rng);
        let plan = AttackPlan::new(
            AttackVariant::TwoColluderCircle,
            colluders,
            Key::random(8, &mut rng),
        );
        let out = run_collusive_circle(n, &keys, &plan, 8, &mut rng).unwrap();
        assert!(matches!(out.verdict, Verdict::Controlled(_)), "seed {seed}");
        total_failures += out.detections.len();
        total_failures += out.trace.iter().map(|m| m.decoys_failed).sum::<usize>();
    }
    assert_eq!(total_failures, 0);
}

/// An honest participant's per-period view of a controlled run is shaped
/// exactly like an honest run: same moves, same decoy batch sizes, all
/// checks green.
#[test]
fn controlled_transcript_indistinguishable_from_honest() {
    let n = 6;
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let keys = random_keys(n, 16, &mut rng);
    let honest = run_circle(n, &keys, 8, &mut rng).unwrap();

    let plan = AttackPlan::new(
        AttackVariant::TwoColluderCircle,
        set(&[1, 4]),
        Key::random(16, &mut rng),
    );
    let attacked = run_collusive_circle(n, &keys, &plan, 8, &mut rng).unwrap();

    let schema = |o: &mqka::RunOutcome| {
        o.trace
            .iter()
            .map(|m| {
                (
                    m.period,
                    m.sequence_owner,
                    m.leg.clone(),
                    m.from,
                    m.to,
                    m.decoys_checked,
                    m.decoys_failed,
                )
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(schema(&honest), schema(&attacked));
}

/// In every controlled run each honest output equals the target exactly.
#[test]
fn controlled_means_every_honest_output_is_expected() {
    for seed in 0..200u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let keys = random_keys(9, 8, &mut rng);
        let expected = Key::random(8, &mut rng);
        let plan = AttackPlan::new(
            AttackVariant::MultiColluderCircle,
            set(&[0, 3, 6]),
            expected.clone(),
        );
        let out = run_collusive_circle(9, &keys, &plan, 8, &mut rng).unwrap();
        assert!(matches!(out.verdict, Verdict::Controlled(_)));
        for i in (0..9).filter(|i| ![0usize, 3, 6].contains(i)) {
            assert_eq!(out.final_keys[&i], expected);
        }
    }
}

/// More colluder detection picks never hurt: the tree control rate is
/// monotone non-decreasing in the number of parties (one pick each).
#[test]
fn tree_control_rate_monotone_in_picks() {
    let expected: Key = "0b10".parse().unwrap();
    let shots = 9;
    let mut rates = Vec::new();
    for parties in 2..=5usize {
        let trials = 400;
        let mut controlled = 0;
        for seed in 0..trials {
            let mut rng = ChaCha12Rng::seed_from_u64(parties as u64 * 1000 + seed);
            let out = run_tree_attack(parties, shots, 2, 0, &expected, &mut rng).unwrap();
            if matches!(out.verdict, Verdict::Controlled(_)) {
                controlled += 1;
            }
        }
        rates.push(controlled as f64 / trials as f64);
    }
    for w in rates.windows(2) {
        // Allow Monte-Carlo jitter on what must be non-decreasing in truth.
        assert!(w[1] >= w[0] - 0.05, "rates {rates:?}");
    }
}
