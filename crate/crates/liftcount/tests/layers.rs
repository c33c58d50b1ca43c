use liftcount::arith::Rational;
use liftcount::cells::CellTable;
use liftcount::engine::Engine;
use liftcount::logic::parse_problem;
use liftcount::normalize::{divisor_product, normalize, NormalizedProblem};
use liftcount::oracle::{configuration_histogram, oracle_wfomc, OracleBudget};
use num_traits::{One, Zero};

const PROBLEMS: &[&str] = &[
    "forall x: (R(x) | B(x)) & (~R(x) | ~B(x))\nforall x: ~E(x,x)\n\
     forall x: forall y: E(x,y) -> E(y,x)\n\
     forall x: forall y: E(x,y) -> ~(R(x) & R(y)) & ~(B(x) & B(y))\n\
     forall x: exists[=2] y: E(x,y)",
    "forall x: ~E(x,x)\nforall x: forall y: E(x,y) -> E(y,x)\nforall x: exists[=0 mod 2] y: E(x,y)",
    "forall x: exists[<=1] y: E(x,y)",
    "forall x: exists[=1] y: E(x,y)\nforall x: exists[=1] y: E(y,x)",
    "exists[=2] x: L(x)\nforall x: forall y: L(x) & E(x,y) -> ~L(y)",
    "weight P 2 1\nforall x: forall y: x <= y -> (P(x) -> P(y))",
];

fn branches(text: &str) -> Vec<NormalizedProblem> {
    normalize(&parse_problem(text).unwrap()).unwrap().branches
}

#[test]
fn layer_tables_match_histograms() {
    for text in PROBLEMS {
        for branch in branches(text) {
            let cells = CellTable::<Rational>::new(&branch).unwrap();
            for n in 1..=3 {
                let hist = configuration_histogram(&branch, &cells, n, OracleBudget::new(28)).unwrap();
                let mut engine = Engine::new(&branch, &cells, n, vec![]);
                let layer = engine.layer(n);
                for (k, w) in &layer {
                    assert_eq!(hist.get(k), Some(w), "{text} n = {n} at {k:?}");
                }
                for (k, w) in &hist {
                    if engine.accept(k) {
                        assert_eq!(layer.get(k), Some(w), "{text} n = {n} missing {k:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn accepted_histogram_sums_to_the_count() {
    for text in PROBLEMS {
        let input = parse_problem(text).unwrap();
        for n in 2..=3 {
            let mut total = Rational::zero();
            for branch in branches(text) {
                let cells = CellTable::<Rational>::new(&branch).unwrap();
                let engine = Engine::new(&branch, &cells, n, vec![]);
                let hist = configuration_histogram(&branch, &cells, n, OracleBudget::new(28)).unwrap();
                let accepted: Rational = hist.iter().filter(|(k, _)| engine.accept(k)).map(|(_, w)| w).sum();
                total += accepted * &branch.multiplier / divisor_product(&branch.divisors, n).unwrap();
            }
            assert_eq!(total, oracle_wfomc(&input, n, OracleBudget::default()).unwrap(), "{text} n = {n}");
        }
    }
}

#[test]
fn domain_of_one_has_unit_configurations() {
    for branch in branches(PROBLEMS[0]) {
        let cells = CellTable::<Rational>::new(&branch).unwrap();
        let hist = configuration_histogram(&branch, &cells, 1, OracleBudget::default()).unwrap();
        assert_eq!(hist.len(), cells.len());
        assert!(hist.keys().all(|k| k.iter().map(|&c| c as u32).sum::<u32>() == 1));
    }
}

#[test]
fn unit_weight_histograms_are_integral() {
    for branch in branches(PROBLEMS[2]) {
        let cells = CellTable::<Rational>::new(&branch).unwrap();
        let hist = configuration_histogram(&branch, &cells, 3, OracleBudget::default()).unwrap();
        assert!(hist.values().all(|w| w.is_integer() && *w >= Rational::zero()));
        assert!(hist.values().any(|w| *w > Rational::one()));
    }
}
