#![allow(dead_code)]

pub mod props;

use liftcount::logic::{parse_problem, ProblemInput};

pub struct Case {
    pub name: &'static str,
    pub kind: &'static str,
    pub text: &'static str,
}

impl Case {
    pub fn input(&self) -> ProblemInput {
        parse_problem(self.text).unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }
}

pub const CORPUS: &[Case] = &[
    Case {
        name: "two-colored-graphs",
        kind: "ufo2",
        text: "forall x: (R(x) | B(x)) & (~R(x) | ~B(x))\n\
               forall x: ~E(x,x)\n\
               forall x: forall y: E(x,y) -> E(y,x)\n\
               forall x: forall y: E(x,y) -> ~(R(x) & R(y)) & ~(B(x) & B(y))",
    },
    Case {
        name: "smokers",
        kind: "ufo2",
        text: "weight S 3 1\nweight F 1/2 2\n\
               forall x: forall y: F(x,y) & S(x) -> S(y)",
    },
    Case {
        name: "negative-weights",
        kind: "ufo2",
        text: "weight P -1 2\nweight E 1 -3\nforall x: forall y: E(x,y) -> P(x) | P(y)",
    },
    Case { name: "total-relation", kind: "skolem", text: "forall x: exists y: E(x,y)" },
    Case {
        name: "closed-nonempty",
        kind: "skolem",
        text: "exists x: P(x)\nforall x: forall y: P(x) & E(x,y) -> P(y)",
    },
    Case { name: "two-regular", kind: "counting", text: "forall x: ~E(x,x)\nforall x: forall y: E(x,y) -> E(y,x)\nforall x: exists[=2] y: E(x,y)" },
    Case { name: "out-degree-at-most-one", kind: "counting", text: "forall x: exists[<=1] y: E(x,y)" },
    Case {
        name: "flag-iff-friend",
        kind: "counting",
        text: "forall x: A(x) <-> exists[>=1] y: F(x,y)",
    },
    Case {
        name: "few-red-neighbours",
        kind: "counting",
        text: "forall x: exists[<=1] y: (E(x,y) & R(y))",
    },
    Case {
        name: "two-out-or-red",
        kind: "counting",
        text: "forall x: R(x) | exists[=2] y: E(x,y)",
    },
    Case {
        name: "digraph-in-out-one",
        kind: "counting",
        text: "forall x: exists[=1] y: E(x,y)\nforall x: exists[=1] y: E(y,x)",
    },
    Case {
        name: "even-graphs",
        kind: "modulo",
        text: "forall x: ~E(x,x)\nforall x: forall y: E(x,y) -> E(y,x)\nforall x: exists[=0 mod 2] y: E(x,y)",
    },
    Case {
        name: "odd-out-degree-or-red",
        kind: "modulo",
        text: "forall x: R(x) | exists[=1 mod 2] y: E(x,y)",
    },
    Case {
        name: "odd-coins",
        kind: "modulo",
        text: "weight H 2 1\nforall x: (H(x) | T(x)) & (~H(x) | ~T(x))\nexists[=1 mod 2] x: H(x)",
    },
    Case {
        name: "two-leaders",
        kind: "unary-counting",
        text: "exists[=2] x: L(x)\nforall x: forall y: L(x) & E(x,y) -> ~L(y)",
    },
    Case {
        name: "few-red",
        kind: "unary-counting",
        text: "exists[<=1] x: R(x)\nforall x: R(x) | exists y: E(x,y)",
    },
    Case {
        name: "three-edges",
        kind: "cardinality",
        text: "card |E| = 3\nforall x: ~E(x,x)\nforall x: forall y: E(x,y) -> E(y,x)",
    },
    Case {
        name: "functions",
        kind: "cardinality",
        text: "card |F| = n\nforall x: exists y: F(x,y)",
    },
    Case {
        name: "odd-degree-two",
        kind: "cardinality",
        text: "forall x: ~E(x,x)\nforall x: forall y: E(x,y) -> E(y,x)\n\
               forall x: Odd(x) <-> exists[=1 mod 2] y: E(x,y)\n\
               exists[=2] x: Odd(x)\ncard |E| = 4",
    },
    Case {
        name: "monotone-labels",
        kind: "order",
        text: "weight P 2 1\nforall x: forall y: x <= y -> (P(x) -> P(y))",
    },
    Case {
        name: "forward-edges",
        kind: "order",
        text: "weight LEQ 2 1\norder LEQ\nforall x: forall y: E(x,y) -> LEQ(x,y) & ~LEQ(y,x)\nforall x: exists[<=1] y: E(x,y)",
    },
    Case {
        name: "ba-nocc-k1",
        kind: "order",
        text: "order LEQ\nforall x: Eq(x,x) & ~R(x,x)\n\
               forall x: forall y: Eq(x,y) <-> (x <= y & y <= x)\n\
               exists[=2] x: K(x)\n\
               forall x: forall y: K(x) & K(y) & ~Eq(x,y) -> R(x,y)\n\
               forall x: exists[=1] y: R(x,y)\n\
               forall x: forall y: R(x,y) & ~(K(x) & K(y)) -> y <= x\n\
               forall x: forall y: K(x) & ~K(y) -> x <= y",
    },
];

/// Domain sizes whose Herbrand base fits in `max_atoms`.
pub fn sizes_within(input: &ProblemInput, max_atoms: u64, n_max: u32) -> Vec<u32> {
    (1..=n_max).filter(|&n| input.free_atoms(n) <= max_atoms).collect()
}
