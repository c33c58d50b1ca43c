//! Graphs counted by vertices, odd-degree vertices and edges.

use liftcount::bench::sequence_table;
use liftcount::engine::SweepOptions;

fn main() -> liftcount::Result<()> {
    let table = sequence_table(5, 6, &SweepOptions::default())?;
    print!("{table}");
    Ok(())
}
