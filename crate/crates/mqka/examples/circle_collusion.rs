//! Two antipodal colluders on a 6-party circle predetermine the agreed key.
//! They swap sequence halves in setup, each measures the inbound sequence
//! mid-circulation to steal the other arc's partial XOR, and once the legal
//! final key is pooled they re-encode every remaining honest sequence with a
//! forged key. Not a single decoy check fails.
//!
//!     cargo run --example circle_collusion

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mqka::{run_collusive_circle, xor_fold, AttackPlan, AttackVariant, Key};

fn main() -> mqka::Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let n = 6;
    let keys: Vec<Key> = (0..n).map(|_| Key::random(16, &mut rng)).collect();
    let expected = Key::random(16, &mut rng);
    let colluders: BTreeSet<usize> = [1, 4].into_iter().collect();

    println!("legal final key : {}", xor_fold(&keys)?);
    println!("colluder target : {expected}");

    let plan = AttackPlan::new(AttackVariant::TwoColluderCircle, colluders, expected.clone());
    let out = run_collusive_circle(n, &keys, &plan, 8, &mut rng)?;

    println!("verdict         : {:?}", out.verdict);
    println!("decoy failures  : {}", out.detections.len());
    for (id, key) in &out.final_keys {
        let role = if plan.colluders.contains(id) { "colluder" } else { "honest" };
        println!("  P{id} ({role:>8}) outputs {key}");
        assert_eq!(key, &expected);
    }
    Ok(())
}
