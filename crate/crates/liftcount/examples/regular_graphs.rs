//! Labelled k-regular graphs, swept over the domain size with layer reuse.

use liftcount::bench::{self, Params};
use liftcount::engine::SweepOptions;

fn main() -> liftcount::Result<()> {
    let k: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let b = bench::preset("k-regular", &Params::default().set("k", k))?;
    for row in bench::sweep(&b, 1, 16, &SweepOptions::default())? {
        println!("n={:<3} {:>24}  {:>6} ms  {} configs", row.n, row.count, row.wall_ms, row.layer_entries);
    }
    Ok(())
}
