//! The half-circle schedule resists colluding pairs — the stealing stage
//! finishes too late to leave a flipping slot — but three colluders that are
//! not squeezed into one minor arc regain full control. Exhaustive sweep at
//! N = 6.
//!
//!     cargo run --example half_circle_attack

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use mqka::{all_in_minor_arc, run_halfcircle_attack, AttackPlan, AttackVariant, Key, Verdict};

fn main() -> mqka::Result<()> {
    let n = 6;
    println!("all colluder triples on a {n}-party half-circle:");
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let colluders: BTreeSet<usize> = [a, b, c].into_iter().collect();
                let mut rng = ChaCha12Rng::seed_from_u64((a * 36 + b * 6 + c) as u64);
                let keys: Vec<Key> = (0..n).map(|_| Key::random(8, &mut rng)).collect();
                let expected = Key::random(8, &mut rng);
                let plan = AttackPlan::new(
                    AttackVariant::HalfCircleThreeColluder,
                    colluders.clone(),
                    expected,
                );
                let out = run_halfcircle_attack(n, &keys, &plan, 8, &mut rng)?;
                let minor = all_in_minor_arc(n, &colluders)?;
                let verdict = match out.verdict {
                    Verdict::Controlled(_) => "CONTROLLED",
                    _ => "fair",
                };
                println!(
                    "  {{{a},{b},{c}}}  span {} minor-arc {:5}  -> {verdict}",
                    if minor { "<= N/2" } else { " > N/2" },
                    minor
                );
            }
        }
    }
    Ok(())
}
