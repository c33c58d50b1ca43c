//! Compilation of a sentence into the form the counting engine consumes:
//! one universally quantified quantifier-free matrix over `x, y`, plus lists
//! of per-element counting constraints `forall x: exists[..] y: R(x,y)` and
//! global unary constraints `exists[..] x: U(x)`.
//!
//! The pipeline runs in fixed order:
//!
//! 1. fixed unary cardinalities become `exists[=d] x: P(x)` conjuncts;
//! 2. `>=` quantifiers become negated `<=` quantifiers;
//! 3. every quantified subformula that is not already in one of the
//!    recognised clause shapes is replaced by a fresh predicate with a
//!    defining equivalence, innermost first;
//! 4. negated counting literals are replaced with a fresh predicate pair
//!    weighted so that the unwanted models cancel;
//! 5. nullary predicates are expanded into weighted branches;
//! 6. guarded binary counting clauses are unguarded with fresh predicates,
//!    some of which over-count by a binomial factor that is recorded;
//! 7. plain `exists` is removed by weighted Skolemization;
//! 8. the matrix and constraint lists are extracted.
//!
//! Each intermediate state is itself an ordinary [`ProblemInput`] with a
//! multiplier and a list of divisors, so every step can be checked against
//! the brute-force oracle.

use crate::arith::{binomial, format_rational, int, Rational};
use crate::logic::{
    CardTarget, Cardinality, Cmp, Formula, ProblemInput, Quantifier, Signature, Var, WeightTable,
};
use crate::oracle::{oracle_wfomc, OracleBudget};
use crate::{Error, Result};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use Var::{X, Y};

/// Default bound on nullary predicates expanded into branches.
pub const SHANNON_BOUND: usize = 16;

/// An intermediate problem: the weighted count of `problem` times
/// `multiplier`, divided by `C(n, d)` for each `d` in `divisors`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub problem: ProblemInput,
    pub multiplier: Rational,
    pub divisors: Vec<u32>,
}

impl Stage {
    /// The value this stage stands for at domain size `n`, by brute force.
    /// `None` when a divisor vanishes at this `n`.
    pub fn oracle_value(&self, n: u32, budget: OracleBudget) -> Result<Option<Rational>> {
        let Some(div) = divisor_product(&self.divisors, n) else {
            return Ok(None);
        };
        let raw = oracle_wfomc(&self.problem, n, budget)?;
        Ok(Some(raw * &self.multiplier / div))
    }
}

/// `Π C(n, d)`, or `None` when some factor is zero.
pub fn divisor_product(divisors: &[u32], n: u32) -> Option<Rational> {
    let mut acc = Rational::one();
    for &d in divisors {
        let c = binomial(n as u64, d as u64);
        if c.is_zero() {
            return None;
        }
        acc *= Rational::from_integer(c);
    }
    Some(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingConstraint {
    pub pred: String,
    pub cmp: Cmp,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuloConstraint {
    pub pred: String,
    pub cmp: Cmp,
    pub r: u32,
    pub k: u32,
}

/// A cardinality constraint kept symbolic: the predicate's positive weight
/// is multiplied by indeterminate `var` and the count is read off as a
/// coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityConstraint {
    pub pred: String,
    pub var: usize,
    pub target: CardTarget,
}

/// One branch of the normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedProblem {
    /// Quantifier-free matrix; the sentence is `forall x: forall y: psi`.
    pub psi: Formula,
    pub signature: Signature,
    pub order: Option<String>,
    /// `forall x: exists[cmp k] y: R(x,y)`
    pub binary_counting: Vec<CountingConstraint>,
    /// `exists[cmp k] x: U(x)`
    pub unary_counting: Vec<CountingConstraint>,
    /// `forall x: exists[cmp r mod k] y: R(x,y)`
    pub binary_modulo: Vec<ModuloConstraint>,
    /// `exists[cmp r mod k] x: U(x)`
    pub unary_modulo: Vec<ModuloConstraint>,
    pub cardinality: Vec<CardinalityConstraint>,
    /// The count is divided by `C(n, d)` for every entry.
    pub divisors: Vec<u32>,
    pub multiplier: Rational,
    pub weights: WeightTable,
}

impl NormalizedProblem {
    /// Number of distinct cardinality indeterminates.
    pub fn indeterminates(&self) -> usize {
        self.cardinality.iter().map(|c| c.var + 1).max().unwrap_or(0)
    }

    /// Smallest domain size for which the divisors are non-zero.
    pub fn min_domain(&self) -> u32 {
        self.divisors.iter().copied().max().unwrap_or(0)
    }

    /// The branch as a plain problem (with its multiplier and divisors).
    pub fn to_stage(&self) -> Stage {
        let mut parts = vec![Formula::forall_xy(self.psi.clone())];
        for c in &self.binary_counting {
            parts.push(binary_clause(
                Formula::False,
                false,
                Quantifier::Count { cmp: c.cmp, k: c.k },
                Formula::atom(&c.pred, &[X, Y]),
            ));
        }
        for c in &self.binary_modulo {
            parts.push(binary_clause(
                Formula::False,
                false,
                Quantifier::Modulo { cmp: c.cmp, r: c.r, k: c.k },
                Formula::atom(&c.pred, &[X, Y]),
            ));
        }
        for c in &self.unary_counting {
            parts.push(unary_clause(
                Formula::False,
                false,
                Quantifier::Count { cmp: c.cmp, k: c.k },
                Formula::atom(&c.pred, &[X]),
            ));
        }
        for c in &self.unary_modulo {
            parts.push(unary_clause(
                Formula::False,
                false,
                Quantifier::Modulo { cmp: c.cmp, r: c.r, k: c.k },
                Formula::atom(&c.pred, &[X]),
            ));
        }
        Stage {
            problem: ProblemInput {
                sentence: Formula::and(parts),
                signature: self.signature.clone(),
                cardinality: self
                    .cardinality
                    .iter()
                    .map(|c| Cardinality { pred: c.pred.clone(), target: c.target })
                    .collect(),
                order: self.order.clone(),
                weights: self.weights.clone(),
            },
            multiplier: self.multiplier.clone(),
            divisors: self.divisors.clone(),
        }
    }
}

impl fmt::Display for NormalizedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "# multiplier {}", format_rational(&self.multiplier))?;
        for d in &self.divisors {
            write!(f, ", divide by C(n,{d})")?;
        }
        writeln!(f)?;
        for c in &self.cardinality {
            writeln!(f, "# |{}| = {} read from z{}", c.pred, c.target, c.var)?;
        }
        write!(f, "{}", self.to_stage().problem.to_text())
    }
}

/// All branches of a normalized input. The input is kept for domain sizes
/// too small for the divisors.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub input: ProblemInput,
    pub branches: Vec<NormalizedProblem>,
}

impl Normalized {
    /// Smallest domain size every branch supports.
    pub fn min_domain(&self) -> u32 {
        self.branches.iter().map(|b| b.min_domain()).max().unwrap_or(0)
    }
}

/// Stage outputs of one pipeline run, in order.
#[derive(Debug, Clone)]
pub struct Trace {
    pub stages: Vec<(&'static str, Vec<Stage>)>,
    pub result: Normalized,
}

pub fn normalize(input: &ProblemInput) -> Result<Normalized> {
    Ok(trace(input, SHANNON_BOUND)?.result)
}

/// Runs the pipeline and records every intermediate stage.
pub fn trace(input: &ProblemInput, shannon_bound: usize) -> Result<Trace> {
    let mut namer = Namer::new(&input.signature);
    let mut stages = Vec::new();

    let mut work = Work::from_input(input);
    work.unary_cardinality_to_counting()?;
    stages.push(("input", vec![work.stage()]));

    work.conjuncts = work.conjuncts.iter().map(rewrite_ge).collect();
    stages.push(("rewrite-ge", vec![work.stage()]));

    axiomatize_subformulas(&mut work, &mut namer);
    stages.push(("axiomatize", vec![work.stage()]));

    eliminate_negation(&mut work, &mut namer)?;
    stages.push(("eliminate-negation", vec![work.stage()]));

    let mut branches = shannon_expand(&work, shannon_bound)?;
    stages.push(("shannon", branches.iter().map(Work::stage).collect()));

    for b in branches.iter_mut() {
        eliminate_disjunctive_counting(b, &mut namer)?;
    }
    stages.push(("counting-lemmas", branches.iter().map(Work::stage).collect()));

    for b in branches.iter_mut() {
        skolemize(b, &mut namer)?;
    }
    stages.push(("skolemize", branches.iter().map(Work::stage).collect()));

    let extracted = branches
        .into_iter()
        .map(|b| extract(b, &mut namer))
        .collect::<Result<Vec<_>>>()?;
    stages.push(("extract", extracted.iter().map(NormalizedProblem::to_stage).collect()));

    Ok(Trace { stages, result: Normalized { input: input.clone(), branches: extracted } })
}

fn stage_err(stage: &'static str, msg: impl Into<String>) -> Error {
    Error::Stage { stage, msg: msg.into() }
}

/// Produces predicate names outside the user's namespace.
struct Namer {
    taken: BTreeSet<String>,
    next: usize,
}

impl Namer {
    fn new(signature: &Signature) -> Namer {
        Namer { taken: signature.keys().cloned().collect(), next: 0 }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        loop {
            let name = format!("_{prefix}{}", self.next);
            self.next += 1;
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// The problem being transformed, as a list of conjuncts.
#[derive(Debug, Clone)]
struct Work {
    conjuncts: Vec<Formula>,
    signature: Signature,
    cardinality: Vec<Cardinality>,
    order: Option<String>,
    weights: WeightTable,
    multiplier: Rational,
    divisors: Vec<u32>,
}

impl Work {
    fn from_input(input: &ProblemInput) -> Work {
        Work {
            conjuncts: input.sentence.conjuncts(),
            signature: input.signature.clone(),
            cardinality: input.cardinality.clone(),
            order: input.order.clone(),
            weights: input.weights.clone(),
            multiplier: Rational::one(),
            divisors: Vec::new(),
        }
    }

    fn stage(&self) -> Stage {
        Stage {
            problem: ProblemInput {
                sentence: Formula::and(self.conjuncts.clone()),
                signature: self.signature.clone(),
                cardinality: self.cardinality.clone(),
                order: self.order.clone(),
                weights: self.weights.clone(),
            },
            multiplier: self.multiplier.clone(),
            divisors: self.divisors.clone(),
        }
    }

    fn declare(&mut self, namer: &mut Namer, prefix: &str, arity: usize) -> String {
        let name = namer.fresh(prefix);
        self.signature.insert(name.clone(), arity);
        name
    }

    fn push(&mut self, f: Formula) {
        let f = f.simplify();
        if f != Formula::True {
            self.conjuncts.push(f);
        }
    }

    /// `|P| = d` with `P` unary and `d` fixed is the sentence
    /// `exists[=d] x: P(x)`.
    fn unary_cardinality_to_counting(&mut self) -> Result<()> {
        let mut kept = Vec::new();
        for c in std::mem::take(&mut self.cardinality) {
            let arity = *self
                .signature
                .get(&c.pred)
                .ok_or_else(|| stage_err("input", format!("unknown predicate {}", c.pred)))?;
            if arity == 0 && c.target.per_n > 0 {
                return Err(stage_err(
                    "input",
                    format!("cardinality of nullary {} cannot depend on n", c.pred),
                ));
            }
            if arity == 1 && c.target.per_n == 0 && Some(&c.pred) != self.order.as_ref() {
                self.conjuncts.push(unary_clause(
                    Formula::False,
                    false,
                    Quantifier::Count { cmp: Cmp::Eq, k: c.target.offset },
                    Formula::atom(&c.pred, &[X]),
                ));
            } else {
                kept.push(c);
            }
        }
        self.cardinality = kept;
        Ok(())
    }
}

/// `forall x: guard | [~] Q y: body`, the guard dropped when false.
pub(crate) fn binary_clause(guard: Formula, negated: bool, q: Quantifier, body: Formula) -> Formula {
    let mut lit = Formula::quant(q, Y, body);
    if negated {
        lit = Formula::not(lit);
    }
    match guard {
        Formula::False => Formula::forall(X, lit),
        g => Formula::forall(X, Formula::or(vec![g, lit])),
    }
}

/// `guard | [~] Q x: body` with a nullary guard.
pub(crate) fn unary_clause(guard: Formula, negated: bool, q: Quantifier, body: Formula) -> Formula {
    let mut lit = Formula::quant(q, X, body);
    if negated {
        lit = Formula::not(lit);
    }
    match guard {
        Formula::False => lit,
        g => Formula::or(vec![g, lit]),
    }
}

/// A possibly negated quantified formula.
struct Literal {
    negated: bool,
    q: Quantifier,
    var: Var,
    body: Formula,
}

fn as_literal(f: &Formula) -> Option<Literal> {
    match f {
        Formula::Quant { q, var, body } => {
            Some(Literal { negated: false, q: *q, var: *var, body: (**body).clone() })
        }
        Formula::Not(g) => match &**g {
            Formula::Quant { q, var, body } => {
                Some(Literal { negated: true, q: *q, var: *var, body: (**body).clone() })
            }
            _ => None,
        },
        _ => None,
    }
}

/// Splits `f` into a quantifier-free guard and exactly one quantified
/// literal, reading `a -> b` and disjunctions. `None` otherwise.
fn split_guarded(f: &Formula) -> Option<(Formula, Literal)> {
    match f {
        Formula::Or(items) => {
            let mut lit = None;
            let mut rest = Vec::new();
            for g in items {
                if g.is_quantifier_free() {
                    rest.push(g.clone());
                } else if lit.is_none() {
                    lit = Some(as_literal(g)?);
                } else {
                    return None;
                }
            }
            Some((Formula::or(rest), lit?))
        }
        Formula::Implies(a, b) => {
            if a.is_quantifier_free() {
                Some((Formula::not((**a).clone()), as_literal(b)?))
            } else if b.is_quantifier_free() {
                let mut lit = as_literal(a)?;
                lit.negated = !lit.negated;
                Some(((**b).clone(), lit))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// For `a <-> b` with one side quantifier-free and the other a literal:
/// the two one-sided clauses `(~g | lit)` and `(g | ~lit)`.
fn split_iff(f: &Formula) -> Option<[(Formula, Literal); 2]> {
    let Formula::Iff(a, b) = f else { return None };
    let (g, lit) = if a.is_quantifier_free() {
        ((**a).clone(), b)
    } else if b.is_quantifier_free() {
        ((**b).clone(), a)
    } else {
        return None;
    };
    let pos = as_literal(lit)?;
    let neg = Literal { negated: !pos.negated, q: pos.q, var: pos.var, body: pos.body.clone() };
    Some([(Formula::not(g.clone()), pos), (g, neg)])
}

/// Renames so that the variable bound by the literal is `target`.
fn rebind(var: Var, body: Formula, target: Var) -> Formula {
    if var == target {
        body
    } else {
        body.swap_vars()
    }
}

/// The clause shapes the later stages act on.
#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// Quantifier-free, possibly under `forall x` or `forall x: forall y`.
    Universal,
    /// `forall x: guard | [~] Q y: body`
    Binary { guard: Formula, negated: bool, q: Quantifier, body: Formula },
    /// `guard | [~] Q x: body`
    Unary { guard: Formula, negated: bool, q: Quantifier, body: Formula },
}

fn classify(f: &Formula) -> Option<Shape> {
    if f.is_quantifier_free() {
        return Some(Shape::Universal);
    }
    let literal_shape = |guard: Formula, lit: Literal, var: Var, binary: bool| {
        if lit.var != var || lit.q == Quantifier::Forall || !lit.body.is_quantifier_free() {
            return None;
        }
        let (negated, q, body) = (lit.negated, lit.q, lit.body);
        Some(if binary {
            Shape::Binary { guard, negated, q, body }
        } else {
            Shape::Unary { guard, negated, q, body }
        })
    };
    match f {
        Formula::Quant { q: Quantifier::Forall, var: X, body } => {
            if body.is_quantifier_free() {
                return Some(Shape::Universal);
            }
            if let Formula::Quant { q: Quantifier::Forall, var: Y, body: inner } = &**body {
                return inner.is_quantifier_free().then_some(Shape::Universal);
            }
            if let Some(lit) = as_literal(body) {
                return literal_shape(Formula::False, lit, Y, true);
            }
            let (guard, lit) = split_guarded(body)?;
            literal_shape(guard, lit, Y, true)
        }
        _ => {
            if let Some(lit) = as_literal(f) {
                return literal_shape(Formula::False, lit, X, false);
            }
            let (guard, lit) = split_guarded(f)?;
            if guard.free_vars() != 0 {
                return None;
            }
            literal_shape(guard, lit, X, false)
        }
    }
}

/// Replaces `>=` quantifiers by negated `<=` ones; `>= 0` is vacuous.
pub fn rewrite_ge(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(rewrite_ge(g)),
        Formula::And(v) => Formula::And(v.iter().map(rewrite_ge).collect()),
        Formula::Or(v) => Formula::Or(v.iter().map(rewrite_ge).collect()),
        Formula::Implies(a, b) => Formula::implies(rewrite_ge(a), rewrite_ge(b)),
        Formula::Iff(a, b) => Formula::iff(rewrite_ge(a), rewrite_ge(b)),
        Formula::Quant { q, var, body } => {
            let body = rewrite_ge(body);
            match *q {
                Quantifier::Count { cmp: Cmp::Ge, k: 0 }
                | Quantifier::Modulo { cmp: Cmp::Ge, r: 0, .. } => Formula::True,
                Quantifier::Count { cmp: Cmp::Ge, k } => Formula::not(Formula::quant(
                    Quantifier::Count { cmp: Cmp::Le, k: k - 1 },
                    *var,
                    body,
                )),
                Quantifier::Modulo { cmp: Cmp::Ge, r, k } => Formula::not(Formula::quant(
                    Quantifier::Modulo { cmp: Cmp::Le, r: r - 1, k },
                    *var,
                    body,
                )),
                q => Formula::quant(q, *var, body),
            }
        }
    }
}

/// Brings every conjunct into one of the [`Shape`]s, defining nested
/// quantified subformulas by fresh predicates.
fn axiomatize_subformulas(work: &mut Work, namer: &mut Namer) {
    let conjuncts = std::mem::take(&mut work.conjuncts);
    let mut ax = Axiomatizer { work, namer };
    for c in conjuncts {
        ax.sentence(c);
    }
}

struct Axiomatizer<'a> {
    work: &'a mut Work,
    namer: &'a mut Namer,
}

impl Axiomatizer<'_> {
    fn sentence(&mut self, f: Formula) {
        if f.is_quantifier_free() {
            self.work.push(f);
            return;
        }
        if let Formula::Quant { q: Quantifier::Forall, var, body } = f {
            return self.universal_x(rebind(var, *body, X));
        }
        if let Some(lit) = as_literal(&f) {
            return self.sentence_guarded(Formula::False, lit);
        }
        if let Some((g, lit)) = split_guarded(&f) {
            return self.sentence_guarded(g, lit);
        }
        if let Some([a, b]) = split_iff(&f) {
            self.sentence_guarded(a.0, a.1);
            return self.sentence_guarded(b.0, b.1);
        }
        if let Formula::And(items) = f {
            return items.into_iter().for_each(|g| self.sentence(g));
        }
        let g = self.define_all(&f);
        self.work.push(g);
    }

    /// `chi | [~] Q v: body` with `chi` nullary and quantifier-free.
    fn sentence_guarded(&mut self, chi: Formula, lit: Literal) {
        let body = rebind(lit.var, lit.body, X);
        let body = self.define_all(&body);
        let clause = match (lit.q, lit.negated) {
            (Quantifier::Forall, false) => Formula::forall(X, Formula::or(vec![chi, body])),
            (Quantifier::Forall, true) => {
                unary_clause(chi, false, Quantifier::Exists, Formula::not(body))
            }
            (Quantifier::Exists, true) => {
                Formula::forall(X, Formula::or(vec![chi, Formula::not(body)]))
            }
            (q, negated) => unary_clause(chi, negated, q, body),
        };
        self.work.push(clause);
    }

    /// `forall x: body` with only `x` free in `body`.
    fn universal_x(&mut self, body: Formula) {
        if body.is_quantifier_free() {
            return self.work.push(Formula::forall(X, body));
        }
        match body {
            Formula::Quant { q: Quantifier::Forall, var: X, body: inner } => {
                self.universal_x(*inner)
            }
            Formula::Quant { q: Quantifier::Forall, var: Y, body: inner } => {
                let m = self.define_all(&inner);
                self.work.push(Formula::forall_xy(m));
            }
            Formula::And(items) => items.into_iter().for_each(|g| self.universal_x(g)),
            body => {
                if let Some(lit) = as_literal(&body) {
                    return self.guarded(Formula::False, lit);
                }
                if let Some((g, lit)) = split_guarded(&body) {
                    return self.guarded(g, lit);
                }
                if let Some([a, b]) = split_iff(&body) {
                    self.guarded(a.0, a.1);
                    return self.guarded(b.0, b.1);
                }
                let m = self.define_all(&body);
                self.work.push(Formula::forall(X, m));
            }
        }
    }

    /// `forall x: g | [~] Q v: body`
    fn guarded(&mut self, g: Formula, lit: Literal) {
        let body = rebind(lit.var, lit.body, Y);
        let body = self.define_all(&body);
        let clause = match (lit.q, lit.negated) {
            (Quantifier::Forall, false) => Formula::forall_xy(Formula::or(vec![g, body])),
            (Quantifier::Forall, true) => {
                binary_clause(g, false, Quantifier::Exists, Formula::not(body))
            }
            (Quantifier::Exists, true) => {
                Formula::forall_xy(Formula::or(vec![g, Formula::not(body)]))
            }
            (q, negated) => binary_clause(g, negated, q, body),
        };
        self.work.push(clause);
    }

    /// Replaces every maximal quantified subformula by a defined atom.
    fn define_all(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
            Formula::Not(g) => Formula::not(self.define_all(g)),
            Formula::And(v) => Formula::And(v.iter().map(|g| self.define_all(g)).collect()),
            Formula::Or(v) => Formula::Or(v.iter().map(|g| self.define_all(g)).collect()),
            Formula::Implies(a, b) => {
                let a = self.define_all(a);
                Formula::implies(a, self.define_all(b))
            }
            Formula::Iff(a, b) => {
                let a = self.define_all(a);
                Formula::iff(a, self.define_all(b))
            }
            Formula::Quant { .. } => self.define(f),
        }
    }

    fn define(&mut self, f: &Formula) -> Formula {
        let Some(lit) = as_literal(f) else { unreachable!("define on a non-quantifier") };
        match f.free_vars() {
            0 => {
                let name = self.work.declare(self.namer, "N", 0);
                let atom = Formula::atom(&name, &[]);
                let neg = Literal { negated: true, q: lit.q, var: lit.var, body: lit.body.clone() };
                self.sentence_guarded(Formula::not(atom.clone()), lit);
                self.sentence_guarded(atom.clone(), neg);
                atom
            }
            mask => {
                let free = if mask == 1 { X } else { Y };
                // canonical copy with the free variable named x
                let lit = if free == X {
                    lit
                } else {
                    Literal { var: lit.var.other(), body: lit.body.swap_vars(), ..lit }
                };
                let name = self.work.declare(self.namer, "D", 1);
                let atom = Formula::atom(&name, &[X]);
                let neg = Literal { negated: true, q: lit.q, var: lit.var, body: lit.body.clone() };
                self.guarded(Formula::not(atom.clone()), lit);
                self.guarded(atom, neg);
                Formula::atom(&name, &[free])
            }
        }
    }
}

/// Replaces each negated counting literal with a fresh `A` and adds
/// `(A | phi) & (B | phi) & (A | B)` where `B` weighs -1 when false.
fn eliminate_negation(work: &mut Work, namer: &mut Namer) -> Result<()> {
    for c in std::mem::take(&mut work.conjuncts) {
        match classify(&c) {
            Some(Shape::Binary { guard, negated: true, q, body }) => {
                let a = work.declare(namer, "A", 1);
                let b = work.declare(namer, "B", 1);
                work.weights.set(&a, int(1), int(1));
                work.weights.set(&b, int(1), int(-1));
                let (a, b) = (Formula::atom(&a, &[X]), Formula::atom(&b, &[X]));
                work.push(Formula::forall(X, Formula::or(vec![guard, a.clone()])));
                work.push(binary_clause(a.clone(), false, q, body.clone()));
                work.push(binary_clause(b.clone(), false, q, body));
                work.push(Formula::forall(X, Formula::or(vec![a, b])));
            }
            Some(Shape::Unary { guard, negated: true, q, body }) => {
                let a = work.declare(namer, "A", 0);
                let b = work.declare(namer, "B", 0);
                work.weights.set(&a, int(1), int(1));
                work.weights.set(&b, int(1), int(-1));
                let (a, b) = (Formula::atom(&a, &[]), Formula::atom(&b, &[]));
                work.push(Formula::or(vec![guard, a.clone()]));
                work.push(unary_clause(a.clone(), false, q, body.clone()));
                work.push(unary_clause(b.clone(), false, q, body));
                work.push(Formula::or(vec![a, b]));
            }
            Some(_) => work.conjuncts.push(c),
            None => {
                return Err(stage_err("eliminate-negation", format!("unexpected conjunct {c}")))
            }
        }
    }
    Ok(())
}

/// One branch per truth assignment of the nullary predicates.
fn shannon_expand(work: &Work, bound: usize) -> Result<Vec<Work>> {
    let nullary: Vec<String> =
        work.signature.iter().filter(|(_, &a)| a == 0).map(|(p, _)| p.clone()).collect();
    if nullary.len() > bound {
        return Err(Error::ShannonBound { count: nullary.len(), bound });
    }
    let fixed: BTreeMap<&str, u32> = work
        .cardinality
        .iter()
        .filter(|c| nullary.contains(&c.pred))
        .map(|c| (c.pred.as_str(), c.target.offset))
        .collect();
    let mut out = Vec::new();
    'assign: for mask in 0u64..1 << nullary.len() {
        let value = |p: &str| nullary.iter().position(|q| q == p).map(|i| mask >> i & 1 == 1);
        let mut mult = work.multiplier.clone();
        for p in &nullary {
            let v = value(p).unwrap();
            if fixed.get(p.as_str()).is_some_and(|&d| d != v as u32) {
                continue 'assign;
            }
            let (w, wb) = work.weights.get(p);
            mult *= if v { w } else { wb };
        }
        if mult.is_zero() {
            continue;
        }
        let mut branch = Work {
            conjuncts: Vec::new(),
            signature: work.signature.clone(),
            cardinality: work
                .cardinality
                .iter()
                .filter(|c| !nullary.contains(&c.pred))
                .cloned()
                .collect(),
            order: work.order.clone(),
            weights: work.weights.clone(),
            multiplier: mult,
            divisors: work.divisors.clone(),
        };
        branch.signature.retain(|_, a| *a > 0);
        for c in &work.conjuncts {
            let g = c.assign(&|atom| if atom.args.is_empty() { value(&atom.pred) } else { None });
            if g == Formula::False {
                continue 'assign;
            }
            branch.push(g);
        }
        out.push(branch);
    }
    Ok(out)
}

/// Removes guards from binary counting clauses.
///
/// Clauses sharing a counting literal are merged first (their guards are
/// conjoined). A guarded `=` clause becomes an unguarded one on a fresh
/// `B`, a unary `U` of the right size collecting the witnesses of guarded
/// elements, and a divisor `C(n, k)` for the choice of `U`. A guarded `<=`
/// clause only needs `B`.
fn eliminate_disjunctive_counting(work: &mut Work, namer: &mut Namer) -> Result<()> {
    let mut merged: Vec<(Quantifier, Formula, Vec<Formula>)> = Vec::new();
    for c in std::mem::take(&mut work.conjuncts) {
        match classify(&c) {
            Some(Shape::Binary { guard, negated: false, q, body }) if q.is_counting() => {
                match merged.iter_mut().find(|(q2, b2, _)| *q2 == q && *b2 == body) {
                    Some((_, _, guards)) => guards.push(guard),
                    None => merged.push((q, body, vec![guard])),
                }
            }
            Some(Shape::Binary { negated: true, .. }) | Some(Shape::Unary { negated: true, .. }) => {
                return Err(stage_err("counting-lemmas", format!("negated literal left in {c}")))
            }
            Some(_) => work.conjuncts.push(c),
            None => return Err(stage_err("counting-lemmas", format!("unexpected conjunct {c}"))),
        }
    }
    for (q, body, guards) in merged {
        let guard = Formula::and(guards).simplify();
        match guard {
            Formula::False => work.push(binary_clause(Formula::False, false, q, body)),
            Formula::True => {}
            guard => {
                let r = atomize_binary(work, namer, body);
                let b = work.declare(namer, "W", 2);
                let bxy = Formula::atom(&b, &[X, Y]);
                work.push(binary_clause(Formula::False, false, q, bxy.clone()));
                let tie = Formula::forall_xy(Formula::or(vec![
                    guard.clone(),
                    Formula::iff(bxy.clone(), r),
                ]));
                let param = match q {
                    Quantifier::Count { cmp: Cmp::Eq, k } => Some(k),
                    Quantifier::Modulo { cmp: Cmp::Eq, r, .. } => Some(r),
                    Quantifier::Count { cmp: Cmp::Le, .. } | Quantifier::Modulo { cmp: Cmp::Le, .. } => {
                        None
                    }
                    q => {
                        return Err(stage_err(
                            "counting-lemmas",
                            format!("quantifier {q:?} should have been rewritten"),
                        ))
                    }
                };
                match param {
                    Some(k) => {
                        let u = work.declare(namer, "U", 1);
                        work.push(unary_clause(
                            Formula::False,
                            false,
                            Quantifier::Count { cmp: Cmp::Eq, k },
                            Formula::atom(&u, &[X]),
                        ));
                        work.push(Formula::forall_xy(Formula::or(vec![
                            Formula::not(guard),
                            Formula::not(bxy),
                            Formula::atom(&u, &[Y]),
                        ])));
                        work.divisors.push(k);
                    }
                    None => {
                        work.push(Formula::forall_xy(Formula::or(vec![
                            Formula::not(guard),
                            Formula::not(bxy),
                        ])));
                    }
                }
                work.push(tie);
            }
        }
    }
    Ok(())
}

/// An atom `R(x,y)` equivalent to `body`, defining a fresh `R` unless
/// `body` already is such an atom.
fn atomize_binary(work: &mut Work, namer: &mut Namer, body: Formula) -> Formula {
    if let Formula::Atom(a) = &body {
        if a.args == [X, Y] && Some(&a.pred) != work.order.as_ref() {
            return body;
        }
    }
    let r = work.declare(namer, "R", 2);
    let atom = Formula::atom(&r, &[X, Y]);
    work.push(Formula::forall_xy(Formula::iff(atom.clone(), body)));
    atom
}

fn atomize_unary(work: &mut Work, namer: &mut Namer, body: Formula) -> Formula {
    if let Formula::Atom(a) = &body {
        if a.args == [X] {
            return body;
        }
    }
    let u = work.declare(namer, "V", 1);
    let atom = Formula::atom(&u, &[X]);
    work.push(Formula::forall(X, Formula::iff(atom.clone(), body)));
    atom
}

/// `forall x: g | exists y: phi` becomes `forall x: forall y: S(x) | ~(g | phi)`
/// with `S` weighing -1 when false; a sentence-level `exists x: phi` is the
/// same with `x` vacuous.
fn skolemize(work: &mut Work, namer: &mut Namer) -> Result<()> {
    for c in std::mem::take(&mut work.conjuncts) {
        let (guard, body) = match classify(&c) {
            Some(Shape::Binary { guard, negated: false, q: Quantifier::Exists, body }) => {
                (guard, body)
            }
            Some(Shape::Unary { guard, negated: false, q: Quantifier::Exists, body }) => {
                (guard, body.swap_vars())
            }
            Some(_) => {
                work.conjuncts.push(c);
                continue;
            }
            None => return Err(stage_err("skolemize", format!("unexpected conjunct {c}"))),
        };
        let s = work.declare(namer, "S", 1);
        work.weights.set(&s, int(1), int(-1));
        work.push(Formula::forall_xy(Formula::or(vec![
            Formula::atom(&s, &[X]),
            Formula::not(Formula::or(vec![guard, body])),
        ])));
    }
    Ok(())
}

fn extract(mut work: Work, namer: &mut Namer) -> Result<NormalizedProblem> {
    let err = |c: &Formula| stage_err("extract", format!("conjunct outside the normal form: {c}"));
    let mut psi = Vec::new();
    let mut binary_counting = Vec::new();
    let mut unary_counting = Vec::new();
    let mut binary_modulo = Vec::new();
    let mut unary_modulo = Vec::new();
    let mut pending = std::mem::take(&mut work.conjuncts);
    while !pending.is_empty() {
        for c in std::mem::take(&mut pending) {
            match classify(&c) {
                Some(Shape::Universal) => psi.push(strip_universal(&c)),
                Some(Shape::Binary { guard: Formula::False, negated: false, q, body }) => {
                    let Formula::Atom(atom) = atomize_binary(&mut work, namer, body) else {
                        unreachable!()
                    };
                    match q {
                        Quantifier::Count { cmp, k } if cmp != Cmp::Ge => {
                            binary_counting.push(CountingConstraint { pred: atom.pred, cmp, k })
                        }
                        Quantifier::Modulo { cmp, r, k } => {
                            binary_modulo.push(ModuloConstraint { pred: atom.pred, cmp, r, k })
                        }
                        _ => return Err(err(&c)),
                    }
                }
                Some(Shape::Unary { guard: Formula::False, negated: false, q, body }) => {
                    let Formula::Atom(atom) = atomize_unary(&mut work, namer, body) else {
                        unreachable!()
                    };
                    match q {
                        Quantifier::Count { cmp, k } if cmp != Cmp::Ge => {
                            unary_counting.push(CountingConstraint { pred: atom.pred, cmp, k })
                        }
                        Quantifier::Modulo { cmp, r, k } => {
                            unary_modulo.push(ModuloConstraint { pred: atom.pred, cmp, r, k })
                        }
                        _ => return Err(err(&c)),
                    }
                }
                _ => return Err(err(&c)),
            }
        }
        // atomization may have added definitions
        pending = std::mem::take(&mut work.conjuncts);
    }

    let mut mentioned = Signature::new();
    for f in &psi {
        f.collect_predicates(&mut mentioned);
    }
    for (p, &a) in &work.signature {
        if mentioned.contains_key(p) || Some(p) == work.order.as_ref() {
            continue;
        }
        let args: &[Var] = if a == 1 { &[X] } else { &[X, Y] };
        let atom = Formula::atom(p, args);
        psi.push(Formula::or(vec![atom.clone(), Formula::not(atom)]));
    }

    let mut vars: BTreeMap<String, usize> = BTreeMap::new();
    let mut cardinality = Vec::new();
    for c in &work.cardinality {
        let next = vars.len();
        let var = *vars.entry(c.pred.clone()).or_insert(next);
        cardinality.push(CardinalityConstraint { pred: c.pred.clone(), var, target: c.target });
    }

    Ok(NormalizedProblem {
        psi: Formula::and(psi).simplify(),
        signature: work.signature,
        order: work.order,
        binary_counting,
        unary_counting,
        binary_modulo,
        unary_modulo,
        cardinality,
        divisors: work.divisors,
        multiplier: work.multiplier,
        weights: work.weights,
    })
}

fn strip_universal(f: &Formula) -> Formula {
    match f {
        Formula::Quant { q: Quantifier::Forall, body, .. } => strip_universal(body),
        g => g.clone(),
    }
}
