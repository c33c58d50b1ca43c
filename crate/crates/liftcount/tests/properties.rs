mod common;

use common::props::{self, poly, rational};
use liftcount::arith::Rational;
use liftcount::engine::{count, SweepOptions};
use liftcount::logic::parse_problem;
use liftcount::normalize::normalize;
use liftcount::oracle::{oracle_wfomc, OracleBudget};
use num_traits::{One, Zero};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        props::ring_laws(&a, &b, &c)?;
    }

    #[test]
    fn ring_laws_over_rationals(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
    }

    #[test]
    fn fold_order_does_not_matter(case in props::fold_case()) {
        props::fold_order(&case)?;
    }

    #[test]
    fn extended_updaters_match_fresh_ones(case in props::updater_case()) {
        props::extension_matches_fresh(&case)?;
    }

    #[test]
    fn unit_weight_summaries_count_tables(case in props::unit_case()) {
        props::unit_summaries(&case)?;
    }
}

fn literal() -> impl Strategy<Value = String> {
    let atoms = prop::sample::select(vec!["P(x)", "P(y)", "E(x,y)", "E(y,x)", "E(x,x)", "F(x,y)", "F(y,y)"]);
    (atoms, any::<bool>()).prop_map(|(a, neg)| if neg { format!("~{a}") } else { a.to_string() })
}

fn extra() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        (prop::sample::select(vec!["=", "<=", ">="]), 0u32..3)
            .prop_map(|(c, k)| format!("forall x: exists[{c}{k}] y: E(x,y)\n")),
        (0u32..2, 2u32..4).prop_map(|(r, k)| format!("forall x: exists[={r} mod {k}] y: F(x,y)\n")),
        (0u32..3).prop_map(|k| format!("exists[={k}] x: P(x)\n")),
        Just("forall x: exists y: F(x,y)\n".to_string()),
        Just("exists x: P(x) & F(x,x)\n".to_string()),
        (0u32..4).prop_map(|k| format!("card |E| = {k}\n")),
        Just("forall x: P(x) <-> exists[=1] y: F(x,y)\n".to_string()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_sentences_match_oracle(
        clause in prop::collection::vec(literal(), 1..4),
        extra in extra(),
        w in rational(),
        wbar in rational(),
    ) {
        let text = format!(
            "weight P {w} {wbar}\npredicate P/1\npredicate E/2\npredicate F/2\nforall x: forall y: {}\n{extra}",
            clause.join(" | ")
        );
        let input = parse_problem(&text).unwrap();
        let normalized = normalize(&input).unwrap();
        for n in 1..=3 {
            let expected = oracle_wfomc(&input, n, OracleBudget::default()).unwrap();
            let got = count(&normalized, n, &SweepOptions::default()).unwrap();
            prop_assert_eq!(got, expected, "{} at n = {}", text, n);
        }
    }
}

#[test]
fn zero_weights_vanish() {
    let input = parse_problem("weight P 0 1\nforall x: P(x) | exists y: E(x,y)").unwrap();
    let normalized = normalize(&input).unwrap();
    for n in 1..=3 {
        assert_eq!(
            count(&normalized, n, &SweepOptions::default()).unwrap(),
            oracle_wfomc(&input, n, OracleBudget::default()).unwrap()
        );
    }
    assert!(!Rational::zero().is_one());
}
