//! Every stage of the normal form pipeline for a counting sentence.

use liftcount::arith::format_rational;
use liftcount::logic::parse_problem;
use liftcount::normalize::{trace, SHANNON_BOUND};

fn main() -> liftcount::Result<()> {
    let input = parse_problem("forall x: R(x) | exists[>=2] y: E(x,y)\nexists[=1 mod 3] x: R(x)")?;
    let t = trace(&input, SHANNON_BOUND)?;
    for (name, outs) in &t.stages {
        println!("=== {name}: {} branch(es)", outs.len());
        for stage in outs {
            println!("-- multiplier {} divisors {:?}", format_rational(&stage.multiplier), stage.divisors);
            println!("{}", stage.problem.to_text());
        }
    }
    println!("=== result");
    for b in &t.result.branches {
        println!("{b}");
    }
    Ok(())
}
