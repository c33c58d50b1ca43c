//! 1-types, c-types and grouped 2-tables of a normalized sentence.

use liftcount::arith::Rational;
use liftcount::cells::CellTable;
use liftcount::engine::complexity_exponent;
use liftcount::logic::parse_problem;
use liftcount::normalize::normalize;

fn main() -> liftcount::Result<()> {
    let input = parse_problem(
        "forall x: (R(x) | B(x)) & (~R(x) | ~B(x))\n\
         forall x: ~E(x,x)\n\
         forall x: forall y: E(x,y) -> E(y,x)\n\
         forall x: exists[=1] y: (E(x,y) & R(y))",
    )?;
    for branch in normalize(&input)?.branches {
        let cells = CellTable::<Rational>::new(&branch)?;
        print!("{cells}");
        println!("polynomial degree bound: {}", complexity_exponent(&cells));
    }
    Ok(())
}
