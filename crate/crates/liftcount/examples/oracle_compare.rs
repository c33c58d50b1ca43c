//! Engine against brute-force grounding for a sentence given on the command line.

use liftcount::arith::format_rational;
use liftcount::engine::{count, SweepOptions};
use liftcount::logic::parse_problem;
use liftcount::normalize::normalize;
use liftcount::oracle::{oracle_wfomc, OracleBudget};

fn main() -> liftcount::Result<()> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "forall x: A(x) <-> exists[>=2] y: (F(x,y) & A(y))".into());
    let input = parse_problem(&text)?;
    let normalized = normalize(&input)?;
    for n in 1.. {
        let expected = match oracle_wfomc(&input, n, OracleBudget::default()) {
            Ok(v) => v,
            Err(e) if e.is_refusal() => break,
            Err(e) => return Err(e),
        };
        let got = count(&normalized, n, &SweepOptions::default())?;
        let verdict = if got == expected { "ok" } else { "MISMATCH" };
        println!("n={n} engine={} oracle={} {verdict}", format_rational(&got), format_rational(&expected));
    }
    Ok(())
}
