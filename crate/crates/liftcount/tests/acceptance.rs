//! One line per acceptance criterion. Run with `cargo test --test acceptance`.

mod common;

use common::props::{self, poly};
use common::{sizes_within, CORPUS};
use liftcount::arith::{binomial, factorial, format_rational, int, Rational};
use liftcount::bench::{self, sequence_table, Params};
use liftcount::cells::CellTable;
use liftcount::engine::{complexity_exponent, count, SweepOptions};
use liftcount::logic::parse_problem;
use liftcount::normalize::{normalize, trace, SHANNON_BOUND};
use liftcount::oracle::{oracle_wfomc, OracleBudget};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn engine_count(text: &str, n: u32) -> Rational {
    count(&normalize(&parse_problem(text).unwrap()).unwrap(), n, &SweepOptions::default()).unwrap()
}

fn coins() -> Outcome {
    let start = Instant::now();
    let plain = engine_count("weight H 2 1\nforall x: H(x) | ~H(x)", 3);
    let odd = engine_count("weight H 2 1\nexists[=1 mod 2] x: H(x)", 3);
    let elapsed = start.elapsed();
    check!(plain == int(27), "got {} instead of 27", format_rational(&plain));
    check!(odd == int(14), "got {} instead of 14", format_rational(&odd));
    check!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("27 and 14 in {elapsed:.2?}"))
}

fn corpus() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for case in CORPUS {
        let input = case.input();
        let normalized = normalize(&input).unwrap();
        for n in sizes_within(&input, 24, 24) {
            let expected = oracle_wfomc(&input, n, OracleBudget::default()).unwrap();
            let got = count(&normalized, n, &SweepOptions::default()).unwrap();
            check!(got == expected, "{} at n = {n}: engine {} oracle {}", case.name,
                format_rational(&got), format_rational(&expected));
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    check!(CORPUS.len() >= 12, "only {} problems", CORPUS.len());
    check!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    Ok(format!("{} problems, {checked} sizes up to 24 atoms in {elapsed:.1?}", CORPUS.len()))
}

fn choose(n: u32, k: u32) -> Rational {
    Rational::from_integer(binomial(n as u64, k as u64))
}

fn sequences() -> Outcome {
    let start = Instant::now();
    let table = sequence_table(6, 7, &SweepOptions::default()).unwrap();
    for n in 1..=6u32 {
        check!(table.get(n, 2, 1) == choose(n, 2), "one edge at n = {n}");
        check!(table.get(n, 0, 3) == choose(n, 3), "triangles at n = {n}");
        check!(table.get(n, 2, 2) == choose(n, 3) * int(3), "paths at n = {n}");
        for k in 0..=n / 2 {
            let matchings = factorial(n as u64)
                / (factorial(k as u64) * BigInt::from(1u64 << k) * factorial((n - 2 * k) as u64));
            check!(table.get(n, 2 * k, k) == Rational::from_integer(matchings), "matchings T({n},{},{k})", 2 * k);
        }
        for m in (1..=n).step_by(2) {
            for k in 0..=7 {
                check!(table.get(n, m, k).is_zero(), "T({n},{m},{k}) is not zero");
            }
        }
    }
    let mut cells = 0;
    for n in 1..=4 {
        for m in 0..=n {
            for k in 0..=7 {
                let b = bench::preset("m-odd-degree", &Params::default().set("m", m).set("k", k)).unwrap();
                let expected = oracle_wfomc(&b.input, n, OracleBudget::default()).unwrap();
                check!(table.get(n, m, k) == expected, "T({n},{m},{k}) differs from the oracle");
                cells += 1;
            }
        }
    }
    Ok(format!("n <= 6, k <= 7, {cells} entries oracle-checked, {:.1?}", start.elapsed()))
}

fn even_graphs() -> Outcome {
    let b = bench::preset("r-mod-k-regular", &Params::parse("r=0,k=2").unwrap()).unwrap();
    let rows = bench::sweep(&b, 3, 7, &SweepOptions::default()).unwrap();
    for row in &rows {
        let n = row.n as u64;
        let expected = 1u64 << ((n - 1) * (n - 2) / 2);
        check!(row.count == expected.to_string(), "n = {n}: {} instead of {expected}", row.count);
        if n <= 5 {
            let oracle = oracle_wfomc(&b.input, row.n, OracleBudget::new(25)).unwrap();
            check!(oracle == int(expected as i64), "oracle disagrees at n = {n}");
        }
    }
    Ok("n = 3..7, oracle-confirmed for n <= 5".into())
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let len = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / len, b + y / len));
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn regular_scaling() -> Outcome {
    let b = bench::preset("k-regular", &Params::parse("k=3").unwrap()).unwrap();
    let normalized = normalize(&b.input).unwrap();
    let exponent = normalized
        .branches
        .iter()
        .map(|p| complexity_exponent(&CellTable::<Rational>::new(p).unwrap()))
        .max()
        .unwrap();
    let opts = SweepOptions { deadline: Some(Instant::now() + Duration::from_secs(120)), ..Default::default() };
    let rows = bench::sweep(&b, 10, 50, &opts).unwrap();
    check!(rows[0].count == "11180820", "n = 10 gave {}", rows[0].count);
    let last = rows.last().unwrap();
    check!(last.n == 50 && last.count.parse::<BigInt>().is_ok(), "n = 50 not reached: {}", last.count);
    check!(last.wall_ms < 120_000, "n = 50 took {} ms", last.wall_ms);
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.wall_ms > 0)
        .map(|r| ((r.n as f64).ln(), (r.wall_ms as f64).ln()))
        .collect();
    let fitted = slope(&points);
    check!(fitted <= exponent as f64, "slope {fitted:.2} exceeds {exponent}");
    Ok(format!("n = 50 after {:.1} s, log-log slope {fitted:.2} <= {exponent}", last.wall_ms as f64 / 1000.0))
}

fn stages() -> Outcome {
    let budget = OracleBudget::new(30);
    let (mut compared, mut skipped) = (0, 0);
    for case in CORPUS {
        let input = case.input();
        let t = trace(&input, SHANNON_BOUND).unwrap();
        for n in 1..=3 {
            let expected = oracle_wfomc(&input, n, budget).unwrap();
            for (name, outs) in &t.stages {
                let mut total = Rational::zero();
                let mut undefined = false;
                for stage in outs {
                    match stage.oracle_value(n, budget).unwrap() {
                        Some(v) => total += v,
                        None => undefined = true,
                    }
                }
                if undefined {
                    check!(n < t.result.min_domain(), "{} {name} undefined at n = {n}", case.name);
                    skipped += 1;
                    continue;
                }
                check!(total == expected, "{} after {name} at n = {n}", case.name);
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} stage checks, {skipped} below the smallest divisor-safe size"))
}

fn run_property<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn properties() -> Outcome {
    run_property("ring laws", (poly(), poly(), poly()), |(a, b, c)| props::ring_laws(&a, &b, &c))?;
    run_property("fold order", props::fold_case(), |case| props::fold_order(&case))?;
    run_property("updater extension", props::updater_case(), |case| props::extension_matches_fresh(&case))?;
    run_property("summary totals", props::unit_case(), |case| props::unit_summaries(&case))?;
    Ok("4 properties, 1000 cases each".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("coin examples", coins),
        ("corpus against oracle", corpus),
        ("odd-degree sequence table", sequences),
        ("even graphs", even_graphs),
        ("3-regular scaling", regular_scaling),
        ("normalizer stages", stages),
        ("property suite", properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
