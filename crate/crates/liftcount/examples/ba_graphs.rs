//! Barabasi-Albert style graphs over a linear order, written to CSV.

use liftcount::bench::{self, Params};
use liftcount::engine::SweepOptions;

fn main() -> liftcount::Result<()> {
    let opts = SweepOptions::default();
    let mut rows = Vec::new();
    for name in ["ba", "ba-nocc"] {
        let b = bench::preset(name, &Params::default().set("k", 1))?;
        rows.extend(bench::sweep(&b, 1, 7, &opts)?);
    }
    bench::write_csv(&rows, std::io::stdout())
}
