//! Run all four transmission archetypes honestly and show that everyone
//! agrees on the XOR of the personal keys (or, for the tree, on the shared
//! GHZ bits).
//!
//!     cargo run --example honest_runs

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mqka::{run_cgt, run_circle, run_half_circle, run_tree, xor_fold, Key};

fn main() -> mqka::Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let n = 5;
    let len = 16;
    let d = 8;
    let keys: Vec<Key> = (0..n).map(|_| Key::random(len, &mut rng)).collect();
    let oracle = xor_fold(&keys)?;

    for &name in &["complete-graph", "circle", "half-circle"] {
        let out = match name {
            "complete-graph" => run_cgt(n, &keys, d, &mut rng)?,
            "circle" => run_circle(n, &keys, d, &mut rng)?,
            _ => run_half_circle(n, &keys, d, &mut rng)?,
        };
        let agreed = out.unanimous().expect("all outputs equal");
        assert_eq!(agreed, &oracle);
        println!(
            "{name:>14}: agreed key {agreed}  ({} moves, {} decoy checks, 0 failures)",
            out.trace.len(),
            out.trace.iter().map(|m| m.decoys_checked).sum::<usize>()
        );
    }

    let out = run_tree(n, len + n, len, &vec![1; n], None, &mut rng)?;
    println!(
        "{:>14}: agreed key {}  (GHZ shots, one detection pick per party)",
        "tree",
        out.unanimous().unwrap()
    );
    Ok(())
}
