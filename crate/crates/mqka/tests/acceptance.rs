//! End-to-end acceptance gate. Each test prints one PASS/FAIL line.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use mqka::quantum::SequencePair;
use mqka::{
    all_in_minor_arc, choose_detection_shots, feasible, forged_key, run_cgt, run_circle,
    run_collusive_circle, run_half_circle, run_halfcircle_attack, run_tree, xor_fold, AttackPlan,
    AttackVariant, Error, GhzRegister, Key, TopologyKind, Verdict,
};

struct Gate {
    number: usize,
    label: &'static str,
}

impl Gate {
    fn new(number: usize, label: &'static str) -> Self {
        Gate { number, label }
    }

    fn finish(self, ok: bool) {
        println!(
            "acceptance {}: {} - {}",
            self.number,
            if ok { "PASS" } else { "FAIL" },
            self.label
        );
        assert!(ok, "acceptance {} failed: {}", self.number, self.label);
    }
}

fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

fn random_keys(n: usize, len: usize, rng: &mut impl Rng) -> Vec<Key> {
    (0..n).map(|_| Key::random(len, rng)).collect()
}

#[test]
fn acceptance_1_forged_key_identity() {
    let gate = Gate::new(1, "forged-key substitution steers the fold exactly");
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let mut ok = true;
    for _ in 0..10_000 {
        let n = rng.gen_range(3..=9);
        let keys = random_keys(n, 128, &mut rng);
        let expected = Key::random(128, &mut rng);
        let legal = xor_fold(&keys).unwrap();
        let victim = rng.gen_range(0..n);
        let mut forged = keys.clone();
        forged[victim] = forged_key(&keys[victim], &expected, &legal).unwrap();
        if xor_fold(&forged).unwrap() != expected {
            ok = false;
            break;
        }
    }
    gate.finish(ok && start.elapsed().as_secs() < 5);
}

#[test]
fn acceptance_2_honest_agreement() {
    let gate = Gate::new(2, "honest runs agree with the XOR oracle, zero detections");
    let mut ok = true;
    'outer: for archetype in [
        TopologyKind::CompleteGraph,
        TopologyKind::Circle,
        TopologyKind::HalfCircle,
        TopologyKind::Tree,
    ] {
        for trial in 0..1000u64 {
            let n = 3 + (trial as usize % 6);
            let seed = archetype as u64 * 10_000 + trial;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            if archetype == TopologyKind::Tree {
                let out = run_tree(n, 32 + n, 32, &vec![1; n], None, &mut rng).unwrap();
                let key = out.unanimous();
                let mut rng2 = ChaCha12Rng::seed_from_u64(seed);
                let again = run_tree(n, 32 + n, 32, &vec![1; n], None, &mut rng2).unwrap();
                if key.is_none()
                    || !out.detections.is_empty()
                    || again.unanimous() != key
                {
                    ok = false;
                    break 'outer;
                }
                continue;
            }
            let keys = random_keys(n, 32, &mut rng);
            let oracle = xor_fold(&keys).unwrap();
            let out = match archetype {
                TopologyKind::CompleteGraph => run_cgt(n, &keys, 16, &mut rng),
                TopologyKind::Circle => run_circle(n, &keys, 16, &mut rng),
                TopologyKind::HalfCircle => run_half_circle(n, &keys, 16, &mut rng),
                TopologyKind::Tree => unreachable!(),
            }
            .unwrap();
            if out.unanimous() != Some(&oracle) || !out.detections.is_empty() {
                ok = false;
                break 'outer;
            }
        }
    }
    gate.finish(ok);
}

#[test]
fn acceptance_3_feasibility_predicts_control() {
    let gate = Gate::new(3, "placement feasibility exactly predicts undetected control");
    let start = Instant::now();
    let mut ok = true;
    'outer: for n in 3..=8usize {
        for mask in 1u32..(1 << n) {
            let colluders: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if colluders.len() < 2 || colluders.len() > n - 1 {
                continue;
            }
            let mut rng = ChaCha12Rng::seed_from_u64(n as u64 * 1000 + mask as u64);
            let keys = random_keys(n, 2, &mut rng);
            let expected = Key::random(2, &mut rng);
            let variant = if colluders.len() == 2 {
                AttackVariant::TwoColluderCircle
            } else {
                AttackVariant::MultiColluderCircle
            };
            let plan = AttackPlan::new(variant, colluders.clone(), expected);
            let predicted = feasible(n, &colluders).unwrap();
            let controlled = match run_collusive_circle(n, &keys, &plan, 8, &mut rng) {
                Ok(out) => {
                    matches!(out.verdict, Verdict::Controlled(_)) && out.detections.is_empty()
                }
                Err(Error::Feasibility(_)) => false,
                Err(e) => panic!("unexpected error for {colluders:?}: {e}"),
            };
            if predicted != controlled {
                eprintln!("mismatch at n={n} colluders={colluders:?}: feasible={predicted}");
                ok = false;
                break 'outer;
            }
        }
    }
    gate.finish(ok && start.elapsed().as_secs() < 120);
}

#[test]
fn acceptance_4_named_configurations() {
    let gate = Gate::new(4, "antipodal, near-antipodal and three-colluder placements control");
    let mut ok = true;
    'outer: for (n, colluders) in [(6usize, vec![1usize, 4]), (7, vec![0, 3]), (9, vec![0, 3, 6])] {
        for seed in 0..100u64 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let keys = random_keys(n, 16, &mut rng);
            let expected = Key::random(16, &mut rng);
            let variant = if colluders.len() == 2 {
                AttackVariant::TwoColluderCircle
            } else {
                AttackVariant::MultiColluderCircle
            };
            let plan = AttackPlan::new(variant, set(&colluders), expected.clone());
            let out = run_collusive_circle(n, &keys, &plan, 8, &mut rng).unwrap();
            let honest_controlled = (0..n)
                .filter(|i| !colluders.contains(i))
                .all(|i| out.final_keys[&i] == expected);
            if !matches!(out.verdict, Verdict::Controlled(_))
                || !out.detections.is_empty()
                || !honest_controlled
            {
                ok = false;
                break 'outer;
            }
        }
    }
    gate.finish(ok);
}

#[test]
fn acceptance_5_half_circle_exhaustive_n6() {
    let gate = Gate::new(5, "half-circle: pairs never control; triples control iff spread");
    let mut ok = true;
    let n = 6;
    // Every pair.
    for a in 0..n {
        for b in (a + 1)..n {
            let mut rng = ChaCha12Rng::seed_from_u64((a * n + b) as u64);
            let keys = random_keys(n, 8, &mut rng);
            let plan = AttackPlan {
                variant: AttackVariant::HalfCircleThreeColluder,
                colluders: set(&[a, b]),
                expected: Key::random(8, &mut rng),
            };
            let out = run_halfcircle_attack(n, &keys, &plan, 8, &mut rng).unwrap();
            if matches!(out.verdict, Verdict::Controlled(_)) {
                ok = false;
            }
        }
    }
    // Every triple.
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let colluders = set(&[a, b, c]);
                let mut rng = ChaCha12Rng::seed_from_u64(1000 + (a * 36 + b * 6 + c) as u64);
                let keys = random_keys(n, 8, &mut rng);
                let expected = Key::random(8, &mut rng);
                let plan = AttackPlan::new(
                    AttackVariant::HalfCircleThreeColluder,
                    colluders.clone(),
                    expected,
                );
                let out = run_halfcircle_attack(n, &keys, &plan, 8, &mut rng).unwrap();
                let controlled = matches!(out.verdict, Verdict::Controlled(_))
                    && out.detections.is_empty();
                if controlled != !all_in_minor_arc(n, &colluders).unwrap() {
                    ok = false;
                }
            }
        }
    }
    gate.finish(ok);
}

#[test]
fn acceptance_6_tree_worked_example_and_total_control() {
    let gate = Gate::new(6, "tree: worked example reproduced; total control over all patterns");
    // Part 1: four unchecked shots measuring 0101, target 10: the colluders
    // sacrifice the first and last, leaving exactly 10.
    let remaining = vec![(1usize, 0u8), (2, 1), (3, 0), (4, 1)];
    let expected: Key = "0b10".parse().unwrap();
    let (shots, key) = choose_detection_shots(&remaining, 2, 2, &expected).unwrap();
    let part1 = shots == vec![1, 4] && key == expected;

    // Part 2: with colluder picks >= key bits, claimed 100% control over all
    // 2^6 shot patterns (shots=6, key_bits=2, honest pick exhaustive too).
    let mut controlled = 0usize;
    let mut total = 0usize;
    for pattern in 0u32..64 {
        let bits: Vec<u8> = (0..6).map(|i| (pattern >> (5 - i) & 1) as u8).collect();
        let register = GhzRegister::with_bits(3, bits).unwrap();
        for honest_pick in 0..6usize {
            let picks: BTreeSet<usize> = [honest_pick].into_iter().collect();
            let out = mqka::adversary::run_tree_attack_on_register(
                &register, 2, 0, &picks, &expected,
            )
            .unwrap();
            total += 1;
            if matches!(out.verdict, Verdict::Controlled(_)) {
                controlled += 1;
            }
        }
    }
    let part2 = controlled == total;
    if !part2 {
        eprintln!(
            "tree control rate {}/{} (an all-zero pattern cannot spell a key containing a 1)",
            controlled, total
        );
    }
    gate.finish(part1 && part2);
}

#[test]
fn acceptance_7_tamper_evidence() {
    let gate = Gate::new(7, "blind flips are caught; forged encodings never are");
    let d = 16usize;
    let trials = 10_000usize;
    let mut detected = 0usize;
    for t in 0..trials {
        let mut rng = ChaCha12Rng::seed_from_u64(t as u64);
        let mut pair = SequencePair::generate(0, 8, &mut rng);
        pair.insert_decoys(d, 0, &mut rng).unwrap();
        pair.send_to(1);
        let mask = Key::from_bits(&[1u8; 8]).unwrap();
        pair.blind_flip(&mask).unwrap();
        pair.reveal_decoys(1);
        if pair.reveal_and_verify(1).unwrap().failures > 0 {
            detected += 1;
        }
    }
    let p = 1.0 - 0.5f64.powi(d as i32);
    let sigma = (p * (1.0 - p) * trials as f64).sqrt();
    let flips_caught = detected as f64 >= p * trials as f64 - 3.0 * sigma;

    // The flipping stage of controlled runs is a legitimate encoding: zero
    // decoy failures across 100 seeded controlled runs.
    let mut clean = true;
    for seed in 0..100u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let keys = random_keys(6, 8, &mut rng);
        let plan = AttackPlan::new(
            AttackVariant::TwoColluderCircle,
            set(&[1, 4]),
            Key::random(8, &mut rng),
        );
        let out = run_collusive_circle(6, &keys, &plan, d, &mut rng).unwrap();
        if !out.detections.is_empty() || out.trace.iter().any(|m| m.decoys_failed > 0) {
            clean = false;
        }
    }
    gate.finish(flips_caught && clean);
}

#[test]
fn acceptance_8_fairness_matrix_pattern() {
    let gate = Gate::new(8, "fairness matrix matches the archetype verdict pattern");
    let report = mqka::report::build_fairness_matrix(4, 11).unwrap();
    let cell = |k: TopologyKind| {
        let r = report.rows.iter().find(|r| r.archetype == k).unwrap();
        (r.fair_vs_single, r.fair_vs_collusive)
    };
    let ok = cell(TopologyKind::CompleteGraph) == (true, true)
        && cell(TopologyKind::Circle) == (true, false)
        && !cell(TopologyKind::HalfCircle).1
        && cell(TopologyKind::Tree) == (false, false);
    gate.finish(ok);
}

#[test]
fn acceptance_9_deterministic_reports() {
    let gate = Gate::new(9, "fixed seed yields byte-identical JSON reports");
    use mqka::report::{build_fairness_matrix, emit_report, ReportFormat};
    let a = emit_report(&build_fairness_matrix(2, 99).unwrap(), ReportFormat::Json).unwrap();
    let b = emit_report(&build_fairness_matrix(2, 99).unwrap(), ReportFormat::Json).unwrap();

    // And through the CLI binary, to a file, twice.
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("report-{i}.json"));
        let output = std::process::Command::new(env!("CARGO_BIN_EXE_mqka"))
            .args([
                "report",
                "--trials",
                "2",
                "--seed",
                "99",
                "--format",
                "json",
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(output.status.success());
        files.push(std::fs::read(&path).unwrap());
    }
    gate.finish(a == b && files[0] == files[1] && files[0] == a.as_bytes());
}
