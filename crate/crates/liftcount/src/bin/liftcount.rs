use clap::{Parser, Subcommand};
use liftcount::arith::{format_rational, Rational, WeightValue};
use liftcount::bench::{self, Params, PRESETS};
use liftcount::cells::CellTable;
use liftcount::engine::{self, SweepOptions};
use liftcount::logic::parse_problem;
use liftcount::normalize::{self, SHANNON_BOUND};
use liftcount::oracle::{oracle_wfomc, OracleBudget, DEFAULT_MAX_ATOMS};
use liftcount::{Error, Result};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(name = "liftcount", version, about = "Exact weighted model counting for C2 with modulo quantifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the models of a sentence file.
    Count {
        file: PathBuf,
        #[arg(short, long, required_unless_present = "sweep")]
        n: Option<u32>,
        /// Count every domain size in `a..b` (inclusive).
        #[arg(long, value_parser = parse_range)]
        sweep: Option<(u32, u32)>,
        #[arg(long)]
        json: bool,
        /// Print the size of every layer table.
        #[arg(long)]
        trace_layers: bool,
        /// Give up after this many seconds.
        #[arg(long)]
        timeout: Option<u64>,
    },
    /// Count by grounding and enumeration.
    Oracle {
        file: PathBuf,
        #[arg(short, long)]
        n: u32,
        #[arg(long, default_value_t = DEFAULT_MAX_ATOMS)]
        max_atoms: usize,
        /// Also run the engine and report whether the counts agree.
        #[arg(long)]
        compare: bool,
    },
    /// Print the normal form.
    Normalize {
        file: PathBuf,
        /// Print every pipeline stage.
        #[arg(long)]
        stages: bool,
    },
    /// Print 1-types, c-types and 2-table groups of every branch.
    Cells { file: PathBuf },
    /// Sweep a benchmark family over domain sizes.
    Bench {
        /// Preset name; `list` prints them.
        preset: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, value_parser = parse_range, default_value = "1..8")]
        n: (u32, u32),
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        timeout: Option<u64>,
        /// Check every row within the oracle budget against the oracle.
        #[arg(long)]
        verify: bool,
    },
    /// Counts of graphs by vertices, odd-degree vertices and edges.
    SequenceTable {
        #[arg(long, default_value_t = 6)]
        nmax: u32,
        #[arg(long, default_value_t = 7)]
        kmax: u32,
        #[arg(long)]
        json: bool,
    },
}

fn parse_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s.split_once("..").ok_or("expected a..b")?;
    let a: u32 = a.trim().parse().map_err(|_| format!("bad bound `{a}`"))?;
    let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad bound `{b}`"))?;
    if a == 0 || a > b {
        return Err(format!("empty or zero-based range {a}..{b}"));
    }
    Ok((a, b))
}

fn read_problem(path: &Path) -> Result<liftcount::logic::ProblemInput> {
    Ok(parse_problem(&std::fs::read_to_string(path)?)?)
}

fn options(timeout: Option<u64>) -> SweepOptions {
    SweepOptions {
        deadline: timeout.map(|s| Instant::now() + Duration::from_secs(s)),
        ..Default::default()
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Count { file, n, sweep, json, trace_layers, timeout } => {
            let input = read_problem(&file)?;
            let normalized = normalize::normalize(&input)?;
            let opts = options(timeout);
            let (lo, hi) = sweep.unwrap_or_else(|| (n.unwrap(), n.unwrap()));
            if trace_layers {
                for t in engine::trace_layers(&normalized, hi, opts.deadline)? {
                    eprintln!("branch {} layer {} entries {} ms {}", t.branch, t.h, t.entries, t.wall_ms);
                }
            }
            let rows = engine::sweep(&normalized, lo, hi, &opts)?;
            if json {
                let out: Vec<_> = rows
                    .iter()
                    .map(|r| {
                        json!({"n": r.n, "count": bench::count_text(r), "wall_ms": r.wall_ms,
                               "layer_entries": r.layer_entries})
                    })
                    .collect();
                let out = if sweep.is_some() { json!(out) } else { out[0].clone() };
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else if sweep.is_some() {
                for r in &rows {
                    println!("{} {}", r.n, bench::count_text(r));
                }
            } else {
                println!("{}", bench::count_text(&rows[0]));
            }
            if let Some(r) = rows.iter().find(|r| r.count.is_none()) {
                return Err(Error::Timeout(r.wall_ms));
            }
        }
        Command::Oracle { file, n, max_atoms, compare } => {
            let input = read_problem(&file)?;
            let value = oracle_wfomc(&input, n, OracleBudget::new(max_atoms))?;
            println!("{}", format_rational(&value));
            if compare {
                let normalized = normalize::normalize(&input)?;
                let engine = engine::count(&normalized, n, &SweepOptions::default())?;
                if engine != value {
                    return Err(Error::Invalid(format!("engine disagrees: {}", format_rational(&engine))));
                }
                println!("engine agrees");
            }
        }
        Command::Normalize { file, stages } => {
            let input = read_problem(&file)?;
            if stages {
                let trace = normalize::trace(&input, SHANNON_BOUND)?;
                for (name, outs) in &trace.stages {
                    for (i, stage) in outs.iter().enumerate() {
                        println!("== {name} [{i}] multiplier {} divisors {:?}", format_rational(&stage.multiplier), stage.divisors);
                        println!("{}", stage.problem.to_text());
                    }
                }
            } else {
                for (i, b) in normalize::normalize(&input)?.branches.iter().enumerate() {
                    println!("== branch {i}\n{b}");
                }
            }
        }
        Command::Cells { file } => {
            let input = read_problem(&file)?;
            for (i, b) in normalize::normalize(&input)?.branches.iter().enumerate() {
                println!("== branch {i}");
                if b.indeterminates() == 0 {
                    print!("{}", CellTable::<Rational>::new(b)?);
                } else {
                    print!("{}", CellTable::<WeightValue>::new(b)?);
                }
            }
        }
        Command::Bench { preset, params, n, csv, json, timeout, verify } => {
            if preset == "list" {
                for p in PRESETS {
                    println!("{:<22} {:<8} {}", p.name, p.params.join(","), p.about);
                }
                return Ok(());
            }
            let b = bench::preset(&preset, &Params::parse(&params)?)?;
            let opts = options(timeout);
            let rows = bench::sweep(&b, n.0, n.1, &opts)?;
            if verify {
                for r in &rows {
                    match bench::oracle_count(&b, r.n, &opts) {
                        Ok(v) if format_rational(&v) == r.count => eprintln!("n={} oracle agrees", r.n),
                        Ok(v) => {
                            return Err(Error::Invalid(format!(
                                "n={}: engine {} oracle {}",
                                r.n,
                                r.count,
                                format_rational(&v)
                            )))
                        }
                        Err(e) if e.is_refusal() => eprintln!("n={} beyond oracle budget", r.n),
                        Err(e) => return Err(e),
                    }
                }
            }
            match csv {
                Some(path) => bench::write_csv(&rows, std::fs::File::create(path)?)?,
                None if json => println!("{}", serde_json::to_string_pretty(&rows).unwrap()),
                None => bench::write_csv(&rows, std::io::stdout())?,
            }
        }
        Command::SequenceTable { nmax, kmax, json } => {
            let table = bench::sequence_table(nmax, kmax, &SweepOptions::default())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&table).unwrap());
            } else {
                print!("{table}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_refusal() { 2 } else { 1 })
        }
    }
}
