use liftcount::arith::{binomial, factorial, int, Rational};
use liftcount::bench::{self, sequence_table, Params, SequenceTable};
use liftcount::engine::SweepOptions;
use liftcount::oracle::{oracle_wfomc, OracleBudget};
use num_traits::Zero;
use std::sync::OnceLock;

fn table() -> &'static SequenceTable {
    static TABLE: OnceLock<SequenceTable> = OnceLock::new();
    TABLE.get_or_init(|| sequence_table(6, 7, &SweepOptions::default()).unwrap())
}

fn choose(n: u32, k: u32) -> Rational {
    Rational::from_integer(binomial(n as u64, k as u64))
}

#[test]
fn one_edge() {
    for n in 1..=6 {
        assert_eq!(table().get(n, 2, 1), choose(n, 2), "n = {n}");
    }
}

#[test]
fn even_three_edges_are_triangles() {
    for n in 1..=6 {
        assert_eq!(table().get(n, 0, 3), choose(n, 3), "n = {n}");
    }
}

#[test]
fn paths_of_length_two() {
    for n in 1..=6 {
        assert_eq!(table().get(n, 2, 2), choose(n, 3) * int(3), "n = {n}");
    }
}

#[test]
fn matchings() {
    for n in 1..=6u32 {
        for k in 0..=n / 2 {
            let expected = factorial(n as u64)
                / (factorial(k as u64) * num_bigint::BigInt::from(1u64 << k) * factorial((n - 2 * k) as u64));
            assert_eq!(table().get(n, 2 * k, k), Rational::from_integer(expected), "n = {n}, k = {k}");
        }
    }
}

#[test]
fn odd_counts_of_odd_vertices_vanish() {
    for n in 1..=6 {
        for m in (1..=n).step_by(2) {
            for k in 0..=7 {
                assert!(table().get(n, m, k).is_zero(), "T({n},{m},{k})");
            }
        }
    }
}

#[test]
fn rows_sum_to_all_graphs() {
    for n in 1..=4u32 {
        let edges = n * (n - 1) / 2;
        let total: Rational = (0..=n).flat_map(|m| (0..=7).map(move |k| (m, k))).map(|(m, k)| table().get(n, m, k)).sum();
        if edges <= 7 {
            assert_eq!(total, Rational::from_integer(num_bigint::BigInt::from(1u64 << edges)), "n = {n}");
        }
    }
}

#[test]
fn small_grid_matches_oracle() {
    for n in 1..=4 {
        for m in 0..=n {
            for k in 0..=7 {
                let b = bench::preset("m-odd-degree", &Params::default().set("m", m).set("k", k)).unwrap();
                let expected = oracle_wfomc(&b.input, n, OracleBudget::default()).unwrap();
                assert_eq!(table().get(n, m, k), expected, "T({n},{m},{k})");
            }
        }
    }
}

#[test]
fn regression_values() {
    let b = bench::preset("m-odd-degree", &Params::default().set("m", 2).set("k", 4)).unwrap();
    assert_eq!(oracle_wfomc(&b.input, 5, OracleBudget::new(30)).unwrap(), int(130));
    assert_eq!(table().get(5, 2, 4), int(130));
    assert_eq!(table().get(6, 4, 5), int(1380));
    assert_eq!(table().get(6, 6, 7), int(195));
}

#[test]
fn even_graphs() {
    let b = bench::preset("r-mod-k-regular", &Params::parse("r=0,k=2").unwrap()).unwrap();
    let rows = bench::sweep(&b, 3, 7, &SweepOptions::default()).unwrap();
    for row in &rows {
        let n = row.n as u64;
        let expected = 1u64 << ((n - 1) * (n - 2) / 2);
        assert_eq!(row.count, expected.to_string(), "n = {n}");
        if n <= 5 {
            let oracle = oracle_wfomc(&b.input, row.n, OracleBudget::new(25)).unwrap();
            assert_eq!(oracle, int(expected as i64));
        }
    }
}
