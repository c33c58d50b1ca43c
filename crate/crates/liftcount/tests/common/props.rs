use liftcount::arith::{Rational, WeightValue};
use liftcount::cells::CellTable;
use liftcount::engine::Engine;
use liftcount::logic::parse_problem;
use liftcount::normalize::{normalize, NormalizedProblem};
use num_bigint::BigInt;
use num_traits::One;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use std::sync::OnceLock;

pub fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| Rational::new(BigInt::from(a), BigInt::from(b)))
}

pub fn poly() -> impl Strategy<Value = WeightValue> {
    prop::collection::vec(((0u32..3, 0u32..3), rational()), 0..5)
        .prop_map(|terms| WeightValue::from_terms(2, terms.into_iter().map(|((a, b), c)| (vec![a, b], c))).unwrap())
}

pub fn ring_laws(a: &WeightValue, b: &WeightValue, c: &WeightValue) -> Result<(), TestCaseError> {
    let zero = WeightValue::zero(2);
    let one = WeightValue::one(2);
    prop_assert_eq!(a + b, b + a);
    prop_assert_eq!(&(a + b) + c, a + &(b + c));
    prop_assert_eq!(a * b, b * a);
    prop_assert_eq!(&(a * b) * c, a * &(b * c));
    prop_assert_eq!(a * &(b + c), &(a * b) + &(a * c));
    prop_assert_eq!(&(a + b) * c, &(a * c) + &(b * c));
    prop_assert_eq!(a + &zero, a.clone());
    prop_assert_eq!(a * &one, a.clone());
    prop_assert!((a * &zero).is_zero());
    prop_assert_eq!(a + &a.scale(&-Rational::one()), zero);
    Ok(())
}

pub struct Fixture {
    pub problem: NormalizedProblem,
    pub cells: CellTable<Rational>,
}

pub fn fixtures() -> &'static [Fixture] {
    static CELLS: OnceLock<Vec<Fixture>> = OnceLock::new();
    CELLS.get_or_init(|| {
        [
            "forall x: (R(x) | B(x)) & (~R(x) | ~B(x))\nforall x: ~E(x,x)\n\
             forall x: forall y: E(x,y) -> E(y,x)\n\
             forall x: forall y: E(x,y) -> ~(R(x) & R(y)) & ~(B(x) & B(y))\n\
             forall x: exists[=2] y: E(x,y)",
            "forall x: ~E(x,x)\nforall x: exists[=1] y: E(x,y)\nforall x: exists[=1] y: E(y,x)",
            "weight P 2 -1\nforall x: exists[<=2] y: E(x,y)\nforall x: forall y: E(x,y) -> P(x) | P(y)",
            "forall x: ~E(x,x)\nforall x: forall y: E(x,y) -> E(y,x)\nforall x: exists[=1 mod 2] y: E(x,y)",
            "forall x: exists[=1 mod 3] y: E(x,y)\nforall x: P(x) | E(x,x)",
            "forall x: exists[<=9] y: E(x,y)",
        ]
        .iter()
        .map(|text| {
            let mut branches = normalize(&parse_problem(text).unwrap()).unwrap().branches;
            assert_eq!(branches.len(), 1);
            let problem = branches.remove(0);
            let cells = CellTable::new(&problem).unwrap();
            Fixture { problem, cells }
        })
        .collect()
    })
}

/// Fixtures with unit weights and no reachable overflow for `d <= 6`.
pub const UNIT: &[usize] = &[3, 4, 5];

/// (fixture, populated groups, new 1-type, shuffle keys)
pub type FoldCase = (usize, Vec<(usize, u16)>, usize, Vec<u32>);

pub fn fold_case() -> impl Strategy<Value = FoldCase> {
    (
        0usize..6,
        prop::collection::vec((0usize..32, 1u16..4), 0..5),
        0usize..8,
        prop::collection::vec(any::<u32>(), 32),
    )
}

pub fn fold_order((which, groups, l, keys): &FoldCase) -> Result<(), TestCaseError> {
    let fx = &fixtures()[*which];
    let dims = fx.cells.len() * fx.cells.space.size() as usize;
    let l = l % fx.cells.len();
    let mut prev = vec![0u16; dims];
    for &(i, c) in groups {
        prev[i % dims] = c;
    }
    let present = prev.iter().filter(|&&c| c > 0).count();
    let mut order: Vec<usize> = (0..present).collect();
    order.sort_by_key(|&i| keys[i]);
    let mut engine = Engine::new(&fx.problem, &fx.cells, 64, vec![]);
    let ascending = engine.extension_table(&prev, l, None);
    let shuffled = engine.extension_table(&prev, l, Some(&order));
    prop_assert_eq!(ascending, shuffled);
    Ok(())
}

pub fn updater_case() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (0usize..6, 0usize..8, 0usize..8, 1usize..7)
}

pub fn extension_matches_fresh(&(which, l, j, d): &(usize, usize, usize, usize)) -> Result<(), TestCaseError> {
    let fx = &fixtures()[which];
    let (l, j) = (l % fx.cells.len(), j % fx.cells.len());
    let mut engine = Engine::new(&fx.problem, &fx.cells, 64, vec![]);
    engine.f_table(l, j, d - 1);
    let extended = engine.f_table(l, j, d).clone();
    prop_assert_eq!(extended, engine.f_table_fresh(l, j, d));
    Ok(())
}

pub fn unit_case() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (0usize..UNIT.len(), 0usize..8, 0usize..8, 0usize..7)
}

pub fn unit_summaries(&(which, l, j, d): &(usize, usize, usize, usize)) -> Result<(), TestCaseError> {
    let fx = &fixtures()[UNIT[which]];
    let (l, j) = (l % fx.cells.len(), j % fx.cells.len());
    prop_assert!(fx.cells.grouped[l][j].iter().all(|g| g.2.is_one()));
    let engine = Engine::new(&fx.problem, &fx.cells, 64, vec![]);
    let total: Rational = engine.f_table_fresh(l, j, d).iter().map(|s| &s.2).sum();
    let tables = fx.cells.compat[l][j].len();
    prop_assert_eq!(total, Rational::from_integer(BigInt::from(tables).pow(d as u32)));
    Ok(())
}
