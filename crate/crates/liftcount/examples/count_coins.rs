//! Weighted coins: every element is heads (weight 2) or tails (weight 1).

use liftcount::arith::format_rational;
use liftcount::engine::{count, SweepOptions};
use liftcount::logic::parse_problem;
use liftcount::normalize::normalize;

fn main() -> liftcount::Result<()> {
    let sentences = [
        ("any outcome", "weight H 2 1\nforall x: H(x) | ~H(x)"),
        ("odd number of heads", "weight H 2 1\nexists[=1 mod 2] x: H(x)"),
        ("exactly two heads", "weight H 2 1\nexists[=2] x: H(x)"),
    ];
    for (label, text) in sentences {
        let normalized = normalize(&parse_problem(text)?)?;
        let counts: Vec<String> = (1..=5)
            .map(|n| count(&normalized, n, &SweepOptions::default()).map(|c| format_rational(&c)))
            .collect::<Result<_, _>>()?;
        println!("{label:<22} n=1..5: {}", counts.join(" "));
    }
    Ok(())
}
