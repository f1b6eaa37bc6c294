//! Which colluder placements can control the circle protocol? A placement
//! works exactly when no stretch of honest participants between adjacent
//! colluders exceeds floor((N+1)/2): every sequence must still pass a
//! colluder after the stealing stage finishes. Infeasible placements can
//! only fall back to blind flipping, which the decoy checks catch.
//!
//!     cargo run --example feasibility_scan

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mqka::{circular_gaps, feasible, run_collusive_circle_forced, AttackPlan, AttackVariant, Key, Verdict};

fn main() -> mqka::Result<()> {
    for n in [6usize, 7, 9] {
        println!("N = {n} (gap threshold {}):", (n + 1) / 2);
        let mut shown = 0;
        for mask in 1u32..(1 << n) {
            let colluders: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if colluders.len() != 2 || !colluders.contains(&0) {
                continue;
            }
            let gaps = circular_gaps(n, &colluders)?;
            println!(
                "  {:?} gaps {:?} -> {}",
                colluders,
                gaps,
                if feasible(n, &colluders)? { "controllable" } else { "safe" }
            );
            shown += 1;
            if shown >= n - 1 {
                break;
            }
        }
    }

    // What an infeasible pair can still do: blind-flip one out-of-reach
    // sequence and hope the decoys miss it. With d decoys per hop the run
    // aborts with probability 1 - (1/2)^d.
    let d = 4;
    let trials = 500;
    let mut aborted = 0;
    for seed in 0..trials {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let keys: Vec<Key> = (0..6).map(|_| Key::random(8, &mut rng)).collect();
        let plan = AttackPlan::new(
            AttackVariant::TwoColluderCircle,
            [0, 1].into_iter().collect(),
            Key::random(8, &mut rng),
        );
        if run_collusive_circle_forced(6, &keys, &plan, d, &mut rng)?.verdict == Verdict::Aborted {
            aborted += 1;
        }
    }
    println!(
        "\nforced run with adjacent pair {{0,1}}, d={d}: aborted {aborted}/{trials} \
         (expected ~{:.0})",
        (1.0 - 0.5f64.powi(d as i32)) * trials as f64
    );
    Ok(())
}
