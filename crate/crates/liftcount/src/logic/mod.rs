//! Two-variable first-order logic with counting and modulo quantifiers.
//!
//! Only the variables `x` and `y` exist; quantifiers may rebind them.
//! There are no constants and no function symbols.

mod ground;
mod parse;
mod print;
mod problem;

pub use ground::{eval_sentence, ground, HerbrandBase, Interpretation, Prop};
pub use parse::{parse_formula, parse_problem, ParseError};
pub use problem::{CardTarget, Cardinality, ProblemInput, Signature, WeightTable};

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Eq,
    Le,
    Ge,
}

impl Cmp {
    pub fn holds(self, value: u64, bound: u64) -> bool {
        match self {
            Cmp::Eq => value == bound,
            Cmp::Le => value <= bound,
            Cmp::Ge => value >= bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Forall,
    Exists,
    /// `exists[cmp k]`: the number of witnesses compared with `k`.
    Count { cmp: Cmp, k: u32 },
    /// `exists[cmp r mod k]`: the witness count modulo `k` compared with `r`.
    Modulo { cmp: Cmp, r: u32, k: u32 },
}

impl Quantifier {
    /// Whether `count` witnesses out of `n` candidates satisfy the quantifier.
    pub fn accepts(self, count: u64, n: u64) -> bool {
        match self {
            Quantifier::Forall => count == n,
            Quantifier::Exists => count >= 1,
            Quantifier::Count { cmp, k } => cmp.holds(count, k as u64),
            Quantifier::Modulo { cmp, r, k } => cmp.holds(count % k as u64, r as u64),
        }
    }

    pub fn is_counting(self) -> bool {
        matches!(self, Quantifier::Count { .. } | Quantifier::Modulo { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Var>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: &[Var]) -> Atom {
        Atom { pred: pred.into(), args: args.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant { q: Quantifier, var: Var, body: Box<Formula> },
}

use Formula::*;

impl Formula {
    pub fn atom(pred: &str, args: &[Var]) -> Formula {
        Atom(self::Atom::new(pred, args))
    }

    pub fn not(f: Formula) -> Formula {
        Not(Box::new(f))
    }

    /// Conjunction with the unit and singleton cases collapsed.
    pub fn and(items: Vec<Formula>) -> Formula {
        match items.len() {
            0 => True,
            1 => items.into_iter().next().unwrap(),
            _ => And(items),
        }
    }

    pub fn or(items: Vec<Formula>) -> Formula {
        match items.len() {
            0 => False,
            1 => items.into_iter().next().unwrap(),
            _ => Or(items),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Iff(Box::new(a), Box::new(b))
    }

    pub fn quant(q: Quantifier, var: Var, body: Formula) -> Formula {
        Quant { q, var, body: Box::new(body) }
    }

    pub fn forall(var: Var, body: Formula) -> Formula {
        Formula::quant(Quantifier::Forall, var, body)
    }

    pub fn forall_xy(body: Formula) -> Formula {
        Formula::forall(Var::X, Formula::forall(Var::Y, body))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            True | False | Atom(_) => true,
            Not(f) => f.is_quantifier_free(),
            And(v) | Or(v) => v.iter().all(|f| f.is_quantifier_free()),
            Implies(a, b) | Iff(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Quant { .. } => false,
        }
    }

    /// Free variables as a two-bit mask (bit 0 = x, bit 1 = y).
    pub fn free_vars(&self) -> u8 {
        match self {
            True | False => 0,
            Atom(a) => a.args.iter().fold(0, |m, v| m | (1 << v.index())),
            Not(f) => f.free_vars(),
            And(v) | Or(v) => v.iter().fold(0, |m, f| m | f.free_vars()),
            Implies(a, b) | Iff(a, b) => a.free_vars() | b.free_vars(),
            Quant { var, body, .. } => body.free_vars() & !(1 << var.index()),
        }
    }

    /// Collects predicate names with the arity of their occurrences.
    pub fn collect_predicates(&self, out: &mut BTreeMap<String, usize>) {
        match self {
            True | False => {}
            Atom(a) => {
                out.entry(a.pred.clone()).or_insert(a.args.len());
            }
            Not(f) | Quant { body: f, .. } => f.collect_predicates(out),
            And(v) | Or(v) => v.iter().for_each(|f| f.collect_predicates(out)),
            Implies(a, b) | Iff(a, b) => {
                a.collect_predicates(out);
                b.collect_predicates(out);
            }
        }
    }

    pub fn mentions(&self, pred: &str) -> bool {
        match self {
            True | False => false,
            Atom(a) => a.pred == pred,
            Not(f) | Quant { body: f, .. } => f.mentions(pred),
            And(v) | Or(v) => v.iter().any(|f| f.mentions(pred)),
            Implies(a, b) | Iff(a, b) => a.mentions(pred) || b.mentions(pred),
        }
    }

    /// Applies `map` to every variable occurrence, bound or free.
    pub fn map_vars(&self, map: &impl Fn(Var) -> Var) -> Formula {
        match self {
            True => True,
            False => False,
            Atom(a) => Atom(self::Atom {
                pred: a.pred.clone(),
                args: a.args.iter().map(|&v| map(v)).collect(),
            }),
            Not(f) => Formula::not(f.map_vars(map)),
            And(v) => And(v.iter().map(|f| f.map_vars(map)).collect()),
            Or(v) => Or(v.iter().map(|f| f.map_vars(map)).collect()),
            Implies(a, b) => Formula::implies(a.map_vars(map), b.map_vars(map)),
            Iff(a, b) => Formula::iff(a.map_vars(map), b.map_vars(map)),
            Quant { q, var, body } => Formula::quant(*q, map(*var), body.map_vars(map)),
        }
    }

    /// Exchanges `x` and `y` everywhere.
    pub fn swap_vars(&self) -> Formula {
        self.map_vars(&|v| v.other())
    }

    /// Replaces atoms for which `value` returns a truth value, then folds
    /// constants away.
    pub fn assign(&self, value: &impl Fn(&self::Atom) -> Option<bool>) -> Formula {
        match self {
            True => True,
            False => False,
            Atom(a) => match value(a) {
                Some(true) => True,
                Some(false) => False,
                None => Atom(a.clone()),
            },
            Not(f) => Formula::not(f.assign(value)),
            And(v) => And(v.iter().map(|f| f.assign(value)).collect()),
            Or(v) => Or(v.iter().map(|f| f.assign(value)).collect()),
            Implies(a, b) => Formula::implies(a.assign(value), b.assign(value)),
            Iff(a, b) => Formula::iff(a.assign(value), b.assign(value)),
            Quant { q, var, body } => Formula::quant(*q, *var, body.assign(value)),
        }
        .simplify_top()
    }

    /// Constant folding at the root only; children are assumed folded.
    fn simplify_top(self) -> Formula {
        match self {
            Not(f) => match *f {
                True => False,
                False => True,
                Not(g) => *g,
                g => Formula::not(g),
            },
            And(v) => {
                let mut out = Vec::new();
                for f in v {
                    match f {
                        True => {}
                        False => return False,
                        f => out.push(f),
                    }
                }
                Formula::and(out)
            }
            Or(v) => {
                let mut out = Vec::new();
                for f in v {
                    match f {
                        False => {}
                        True => return True,
                        f => out.push(f),
                    }
                }
                Formula::or(out)
            }
            Implies(a, b) => match (*a, *b) {
                (False, _) | (_, True) => True,
                (True, b) => b,
                (a, False) => Formula::not(a).simplify_top(),
                (a, b) => Formula::implies(a, b),
            },
            Iff(a, b) => match (*a, *b) {
                (True, g) | (g, True) => g,
                (False, g) | (g, False) => Formula::not(g).simplify_top(),
                (a, b) => Formula::iff(a, b),
            },
            Quant { q, var, body } => match (q, *body) {
                (Quantifier::Forall, True) => True,
                (Quantifier::Exists, False) => False,
                (q, body) => Formula::quant(q, var, body),
            },
            f => f,
        }
    }

    /// Full constant folding.
    pub fn simplify(&self) -> Formula {
        self.assign(&|_| None)
    }

    /// Splits nested top-level conjunctions into a flat list.
    pub fn conjuncts(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        fn go(f: &Formula, out: &mut Vec<Formula>) {
            match f {
                And(v) => v.iter().for_each(|g| go(g, out)),
                True => {}
                g => out.push(g.clone()),
            }
        }
        go(self, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables() {
        let f = parse_formula("exists y: E(x,y)").unwrap();
        assert_eq!(f.free_vars(), 1);
        let g = parse_formula("forall x: exists y: E(x,y)").unwrap();
        assert_eq!(g.free_vars(), 0);
    }

    #[test]
    fn folding() {
        let f = parse_formula("(P(x) | true) & Q(x)").unwrap();
        assert_eq!(f.simplify(), Formula::atom("Q", &[Var::X]));
        let g = parse_formula("A -> B").unwrap();
        let h = g.assign(&|a| (a.pred == "A").then_some(true));
        assert_eq!(h, Formula::atom("B", &[]));
    }

    #[test]
    fn quantifier_semantics() {
        let m = Quantifier::Modulo { cmp: Cmp::Ge, r: 1, k: 3 };
        assert!(m.accepts(4, 9));
        assert!(!m.accepts(3, 9));
        assert!(Quantifier::Count { cmp: Cmp::Le, k: 2 }.accepts(0, 5));
    }
}
