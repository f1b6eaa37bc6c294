//! Detection-bits-chosen attack on the GHZ tree protocol: whoever picks
//! their "detection" shots after measuring everything can decide which bits
//! survive into the key. Includes the classic four-remaining-shots case —
//! measured bits 0101, target key 10, so the colluders sacrifice the first
//! and last of the remaining shots.
//!
//!     cargo run --example tree_attack

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mqka::{choose_detection_shots, run_tree_attack, Key, Verdict};

fn main() -> mqka::Result<()> {
    // The honest party already sacrificed shot 0; shots 1..=4 measured 0101.
    let remaining = vec![(1usize, 0u8), (2, 1), (3, 0), (4, 1)];
    let expected: Key = "0b10".parse().unwrap();
    let (picked, key) = choose_detection_shots(&remaining, 2, 2, &expected)?;
    println!("remaining bits 0101, target {expected}: colluders sacrifice shots {picked:?}, key = {key}");
    assert_eq!(key, expected);

    // Full runs: how often do two colluders (one pick each) hit a 2-bit
    // target across random GHZ registers?
    for shots in [6usize, 8, 12] {
        let mut hits = 0;
        let trials = 1000;
        for seed in 0..trials {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let out = run_tree_attack(3, shots, 2, 0, &expected, &mut rng)?;
            if matches!(out.verdict, Verdict::Controlled(_)) {
                hits += 1;
            }
        }
        println!("3 parties, {shots:>2} shots: controlled {hits}/{trials}");
    }
    println!("the key is the first 2 surviving bits, so only the early shots matter");
    Ok(())
}
