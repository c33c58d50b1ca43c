//! Graphs where every vertex has even degree, against 2^C(n-1,2).

use liftcount::engine::{sweep, SweepOptions};
use liftcount::logic::parse_problem;
use liftcount::normalize::normalize;

fn main() -> liftcount::Result<()> {
    let input = parse_problem(
        "forall x: ~E(x,x)\n\
         forall x: forall y: E(x,y) -> E(y,x)\n\
         forall x: exists[=0 mod 2] y: E(x,y)",
    )?;
    let normalized = normalize(&input)?;
    for row in sweep(&normalized, 1, 8, &SweepOptions::default())? {
        let n = row.n as u64;
        let closed = 1u128 << ((n - 1) * n.saturating_sub(2) / 2);
        println!("n={} count={} closed form={}", row.n, row.count.unwrap(), closed);
    }
    Ok(())
}
