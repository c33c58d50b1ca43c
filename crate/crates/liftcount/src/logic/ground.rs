//! Grounding over the domain `{1, ..., n}` and direct semantic evaluation.

use super::problem::{Signature, WeightTable};
use super::{Formula, Quantifier};
use crate::arith::{Rational, WeightValue};
use num_traits::One;
use std::collections::BTreeSet;

/// Index of every non-fixed ground atom. Atoms of the order predicate are
/// fixed to the natural order and get no index.
#[derive(Debug, Clone)]
pub struct HerbrandBase {
    pub n: u32,
    preds: Vec<(String, usize, usize)>,
    order: Option<String>,
    len: usize,
}

impl HerbrandBase {
    pub fn new(signature: &Signature, order: Option<&str>, n: u32) -> HerbrandBase {
        let mut preds = Vec::new();
        let mut len = 0;
        for (p, &a) in signature {
            if Some(p.as_str()) == order {
                continue;
            }
            preds.push((p.clone(), a, len));
            len += (n as usize).pow(a as u32);
        }
        HerbrandBase { n, preds, order: order.map(str::to_string), len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(name, arity, first index)` per enumerated predicate.
    pub fn predicates(&self) -> &[(String, usize, usize)] {
        &self.preds
    }

    /// Index of `pred(args)`, constants zero-based.
    pub fn index(&self, pred: &str, args: &[u32]) -> Option<usize> {
        let (_, a, off) = self.preds.iter().find(|(p, _, _)| p == pred)?;
        debug_assert_eq!(*a, args.len());
        let mut idx = 0usize;
        for &c in args {
            idx = idx * self.n as usize + c as usize;
        }
        Some(off + idx)
    }

    pub fn is_order(&self, pred: &str) -> bool {
        self.order.as_deref() == Some(pred)
    }
}

/// A ground propositional structure over atom indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Prop {
    Const(bool),
    Atom(usize),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
    Iff(Box<Prop>, Box<Prop>),
    /// Holds when the number of true items satisfies the quantifier.
    Count { q: Quantifier, items: Vec<Prop> },
}

impl Prop {
    pub fn eval(&self, bits: u64) -> bool {
        match self {
            Prop::Const(b) => *b,
            Prop::Atom(i) => bits >> i & 1 == 1,
            Prop::Not(p) => !p.eval(bits),
            Prop::And(v) => v.iter().all(|p| p.eval(bits)),
            Prop::Or(v) => v.iter().any(|p| p.eval(bits)),
            Prop::Iff(a, b) => a.eval(bits) == b.eval(bits),
            Prop::Count { q, items } => {
                let c = items.iter().filter(|p| p.eval(bits)).count() as u64;
                q.accepts(c, items.len() as u64)
            }
        }
    }

    fn not(p: Prop) -> Prop {
        match p {
            Prop::Const(b) => Prop::Const(!b),
            Prop::Not(q) => *q,
            q => Prop::Not(Box::new(q)),
        }
    }

    fn and(items: Vec<Prop>) -> Prop {
        let mut out = Vec::new();
        for p in items {
            match p {
                Prop::Const(true) => {}
                Prop::Const(false) => return Prop::Const(false),
                Prop::And(v) => out.extend(v),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Prop::Const(true),
            1 => out.pop().unwrap(),
            _ => Prop::And(out),
        }
    }

    fn or(items: Vec<Prop>) -> Prop {
        let mut out = Vec::new();
        for p in items {
            match p {
                Prop::Const(false) => {}
                Prop::Const(true) => return Prop::Const(true),
                Prop::Or(v) => out.extend(v),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Prop::Const(false),
            1 => out.pop().unwrap(),
            _ => Prop::Or(out),
        }
    }
}

fn ground_rec(f: &Formula, base: &HerbrandBase, env: &mut [u32; 2]) -> Prop {
    match f {
        Formula::True => Prop::Const(true),
        Formula::False => Prop::Const(false),
        Formula::Atom(a) => {
            let args: Vec<u32> = a.args.iter().map(|v| env[v.index()]).collect();
            if base.is_order(&a.pred) {
                Prop::Const(args[0] <= args[1])
            } else {
                Prop::Atom(base.index(&a.pred, &args).expect("predicate missing from signature"))
            }
        }
        Formula::Not(g) => Prop::not(ground_rec(g, base, env)),
        Formula::And(v) => Prop::and(v.iter().map(|g| ground_rec(g, base, env)).collect()),
        Formula::Or(v) => Prop::or(v.iter().map(|g| ground_rec(g, base, env)).collect()),
        Formula::Implies(a, b) => {
            let a = ground_rec(a, base, env);
            let b = ground_rec(b, base, env);
            Prop::or(vec![Prop::not(a), b])
        }
        Formula::Iff(a, b) => {
            let a = ground_rec(a, base, env);
            let b = ground_rec(b, base, env);
            match (a, b) {
                (Prop::Const(x), p) | (p, Prop::Const(x)) => {
                    if x {
                        p
                    } else {
                        Prop::not(p)
                    }
                }
                (a, b) => Prop::Iff(Box::new(a), Box::new(b)),
            }
        }
        Formula::Quant { q, var, body } => {
            let saved = env[var.index()];
            let mut items = Vec::with_capacity(base.n as usize);
            for c in 0..base.n {
                env[var.index()] = c;
                items.push(ground_rec(body, base, env));
            }
            env[var.index()] = saved;
            match q {
                Quantifier::Forall => Prop::and(items),
                Quantifier::Exists => Prop::or(items),
                q => {
                    let fixed = items.iter().filter(|p| **p == Prop::Const(true)).count();
                    let open = items.iter().filter(|p| !matches!(p, Prop::Const(_))).count();
                    if open == 0 {
                        Prop::Const(q.accepts(fixed as u64, base.n as u64))
                    } else {
                        Prop::Count { q: *q, items }
                    }
                }
            }
        }
    }
}

/// Expands every quantifier over the `n` domain elements. Counting and
/// modulo quantifiers become [`Prop::Count`] nodes over their `n` instances.
pub fn ground(sentence: &Formula, base: &HerbrandBase) -> Prop {
    assert!(base.n >= 1, "domain must be non-empty");
    ground_rec(sentence, base, &mut [0, 0])
}

/// A Herbrand interpretation: the set of true ground atoms, constants 1..n.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Interpretation {
    pub n: u32,
    pub true_atoms: BTreeSet<(String, Vec<u32>)>,
}

impl Interpretation {
    pub fn new(n: u32) -> Self {
        Interpretation { n, true_atoms: BTreeSet::new() }
    }

    pub fn with(mut self, pred: &str, args: &[u32]) -> Self {
        self.true_atoms.insert((pred.to_string(), args.to_vec()));
        self
    }

    pub fn holds(&self, pred: &str, args: &[u32]) -> bool {
        self.true_atoms.contains(&(pred.to_string(), args.to_vec()))
    }

    /// Product of `w` over true atoms and `wbar` over false atoms of the
    /// Herbrand base of `signature`.
    pub fn weight(&self, signature: &Signature, weights: &WeightTable) -> WeightValue {
        let mut acc = Rational::one();
        for (p, &a) in signature {
            let (w, wb) = weights.get(p);
            for_each_tuple(self.n, a, |args| {
                let one: Vec<u32> = args.iter().map(|c| c + 1).collect();
                acc *= if self.holds(p, &one) { &w } else { &wb };
            });
        }
        WeightValue::constant(acc, 0)
    }
}

fn for_each_tuple(n: u32, arity: usize, mut f: impl FnMut(&[u32])) {
    let total = (n as usize).pow(arity as u32);
    let mut args = vec![0u32; arity];
    for mut idx in 0..total {
        for slot in args.iter_mut().rev() {
            *slot = (idx % n as usize) as u32;
            idx /= n as usize;
        }
        f(&args);
    }
}

fn eval_rec(f: &Formula, i: &Interpretation, order: Option<&str>, env: &mut [u32; 2]) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => {
            let args: Vec<u32> = a.args.iter().map(|v| env[v.index()]).collect();
            if Some(a.pred.as_str()) == order {
                args[0] <= args[1]
            } else {
                i.holds(&a.pred, &args)
            }
        }
        Formula::Not(g) => !eval_rec(g, i, order, env),
        Formula::And(v) => v.iter().all(|g| eval_rec(g, i, order, env)),
        Formula::Or(v) => v.iter().any(|g| eval_rec(g, i, order, env)),
        Formula::Implies(a, b) => !eval_rec(a, i, order, env) || eval_rec(b, i, order, env),
        Formula::Iff(a, b) => eval_rec(a, i, order, env) == eval_rec(b, i, order, env),
        Formula::Quant { q, var, body } => {
            let saved = env[var.index()];
            let mut count = 0u64;
            for c in 1..=i.n {
                env[var.index()] = c;
                if eval_rec(body, i, order, env) {
                    count += 1;
                }
            }
            env[var.index()] = saved;
            q.accepts(count, i.n as u64)
        }
    }
}

/// Truth of a closed sentence in `i`, straight from the quantifier
/// semantics (no grounding). The order predicate, if any, is the natural
/// order on the constants.
pub fn eval_sentence(f: &Formula, i: &Interpretation, order: Option<&str>) -> bool {
    eval_rec(f, i, order, &mut [1, 1])
}
