//! Brute-force WFOMC: ground the sentence, enumerate every interpretation of
//! the Herbrand base and add up the weights of the models.
//!
//! Only tiny domains are feasible. Assignments are evaluated 64 at a time,
//! one per bit of a machine word, and the remaining atoms are walked in
//! Gray-code order so the per-predicate true counts update in O(1). Models
//! are bucketed by that count vector; weights and cardinality constraints
//! only depend on it.

use crate::arith::{Rational, WeightValue};
use crate::cells::CellTable;
use crate::engine::{Config, Layer};
use crate::normalize::NormalizedProblem;
use crate::logic::{ground, Formula, HerbrandBase, ProblemInput, Prop, Quantifier};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;

pub const DEFAULT_MAX_ATOMS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_atoms: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_atoms: DEFAULT_MAX_ATOMS }
    }
}

impl OracleBudget {
    pub fn new(max_atoms: usize) -> Self {
        OracleBudget { max_atoms }
    }

    pub(crate) fn check(&self, required: usize) -> Result<()> {
        if required > self.max_atoms.min(63) {
            return Err(Error::Budget { required, max: self.max_atoms.min(63) });
        }
        Ok(())
    }
}

/// Histogram of models keyed by the number of true atoms of each enumerated
/// predicate, packed in mixed radix.
pub(crate) struct CountHistogram {
    pub base: HerbrandBase,
    pub radix: Vec<u64>,
    pub buckets: FxHashMap<u64, u64>,
}

impl CountHistogram {
    pub fn decode(&self, mut key: u64) -> Vec<u32> {
        self.radix
            .iter()
            .map(|&r| {
                let c = key % r;
                key /= r;
                c as u32
            })
            .collect()
    }
}

/// A ground formula laid out in one array for fast repeated evaluation.
struct Flat {
    nodes: Vec<Node>,
    kids: Vec<u32>,
}

#[derive(Clone, Copy)]
enum Node {
    Const(bool),
    Lit { atom: u32, positive: bool },
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
    Iff(u32, u32),
    Count(Quantifier, u32, u32),
}

impl Flat {
    fn new(p: &Prop) -> Flat {
        let mut f = Flat { nodes: Vec::new(), kids: Vec::new() };
        f.add(p);
        f
    }

    fn add(&mut self, p: &Prop) -> u32 {
        let node = match p {
            Prop::Const(b) => Node::Const(*b),
            Prop::Atom(i) => Node::Lit { atom: *i as u32, positive: true },
            Prop::Not(q) => match **q {
                Prop::Atom(i) => Node::Lit { atom: i as u32, positive: false },
                ref q => Node::Not(self.add(q)),
            },
            Prop::Iff(a, b) => {
                let a = self.add(a);
                Node::Iff(a, self.add(b))
            }
            Prop::And(v) | Prop::Or(v) | Prop::Count { items: v, .. } => {
                let ids: Vec<u32> = v.iter().map(|q| self.add(q)).collect();
                let start = self.kids.len() as u32;
                self.kids.extend(ids);
                let end = self.kids.len() as u32;
                match p {
                    Prop::And(_) => Node::And(start, end),
                    Prop::Or(_) => Node::Or(start, end),
                    Prop::Count { q, .. } => Node::Count(*q, start, end),
                    _ => unreachable!(),
                }
            }
        };
        self.nodes.push(node);
        self.nodes.len() as u32 - 1
    }

    fn eval(&self, lanes: &[u64]) -> u64 {
        self.eval_at(self.nodes.len() as u32 - 1, lanes)
    }

    /// Evaluates 64 assignments at once: `lanes[a]` holds atom `a` across
    /// the 64 lanes.
    fn eval_at(&self, id: u32, lanes: &[u64]) -> u64 {
        match self.nodes[id as usize] {
            Node::Const(b) => if b { !0 } else { 0 },
            Node::Lit { atom, positive } => {
                let v = lanes[atom as usize];
                if positive { v } else { !v }
            }
            Node::Not(c) => !self.eval_at(c, lanes),
            Node::And(s, e) => {
                let mut acc = !0;
                for &c in &self.kids[s as usize..e as usize] {
                    acc &= self.eval_at(c, lanes);
                    if acc == 0 {
                        break;
                    }
                }
                acc
            }
            Node::Or(s, e) => {
                let mut acc = 0;
                for &c in &self.kids[s as usize..e as usize] {
                    acc |= self.eval_at(c, lanes);
                    if acc == !0 {
                        break;
                    }
                }
                acc
            }
            Node::Iff(a, b) => !(self.eval_at(a, lanes) ^ self.eval_at(b, lanes)),
            Node::Count(q, s, e) => {
                // bit-sliced per-lane counter
                let items = &self.kids[s as usize..e as usize];
                let width = (usize::BITS - items.len().leading_zeros()) as usize;
                let mut counter = [0u64; 8];
                for &c in items {
                    let mut carry = self.eval_at(c, lanes);
                    for slot in counter.iter_mut().take(width) {
                        let t = *slot & carry;
                        *slot ^= carry;
                        carry = t;
                    }
                }
                let mut out = 0;
                for value in 0..=items.len() as u64 {
                    if !q.accepts(value, items.len() as u64) {
                        continue;
                    }
                    let mut eq = !0u64;
                    for (j, slot) in counter.iter().enumerate().take(width) {
                        eq &= if value >> j & 1 == 1 { *slot } else { !*slot };
                    }
                    out |= eq;
                }
                out
            }
        }
    }
}

/// Model counts indexed by packed count vector; dense when the key space is
/// small.
enum Buckets {
    Dense(Vec<u64>),
    Sparse(FxHashMap<u64, u64>),
}

impl Buckets {
    fn new(space: u64) -> Buckets {
        if space <= 1 << 16 {
            Buckets::Dense(vec![0; space as usize])
        } else {
            Buckets::Sparse(FxHashMap::default())
        }
    }

    #[inline]
    fn bump(&mut self, key: u64) {
        match self {
            Buckets::Dense(v) => v[key as usize] += 1,
            Buckets::Sparse(m) => *m.entry(key).or_insert(0) += 1,
        }
    }

    fn merge(mut self, other: Buckets) -> Buckets {
        match (&mut self, other) {
            (Buckets::Dense(a), Buckets::Dense(b)) => {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            }
            (Buckets::Sparse(a), Buckets::Sparse(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
            _ => unreachable!("buckets of one enumeration share a layout"),
        }
        self
    }

    fn into_map(self) -> FxHashMap<u64, u64> {
        match self {
            Buckets::Dense(v) => v
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(k, c)| (k as u64, c))
                .collect(),
            Buckets::Sparse(m) => m,
        }
    }
}

/// Counts the models of `prop` bucketed by per-predicate true counts.
pub(crate) fn enumerate(prop: &Prop, base: HerbrandBase) -> CountHistogram {
    let preds = base.predicates();
    let mut radix = Vec::with_capacity(preds.len());
    let mut s = 1u64;
    let mut stride_of_atom = vec![0u64; base.len()];
    for (_, arity, off) in preds {
        let size = (base.n as usize).pow(*arity as u32);
        radix.push(size as u64 + 1);
        for a in *off..off + size {
            stride_of_atom[a] = s;
        }
        s *= size as u64 + 1;
    }
    // The lowest six atoms vary across the 64 lanes of a word; the others
    // are enumerated in Gray-code order, blocks of them in parallel.
    const PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let atoms = base.len();
    let inner = atoms.min(6);
    let valid: u64 = if inner == 6 { !0 } else { (1u64 << (1 << inner)) - 1 };
    let lane_key: Vec<u64> = (0..64u64)
        .map(|lane| (0..inner).filter(|&a| lane >> a & 1 == 1).map(|a| stride_of_atom[a]).sum())
        .collect();
    let outer = atoms - inner;
    let high = outer.min(8);
    let low = outer - high;
    let space = s;
    let flat = Flat::new(prop);
    let buckets = (0u64..1 << high)
        .into_par_iter()
        .fold(|| Buckets::new(space), |mut hist, block| {
            let mut lanes: Vec<u64> = (0..atoms)
                .map(|a| if a < inner { PATTERNS[a] } else { 0 })
                .collect();
            let mut key = 0u64;
            for a in 0..high {
                if block >> a & 1 == 1 {
                    let atom = inner + low + a;
                    lanes[atom] = !0;
                    key += stride_of_atom[atom];
                }
            }
            for i in 0u64..1 << low {
                if i > 0 {
                    let atom = inner + i.trailing_zeros() as usize;
                    lanes[atom] = !lanes[atom];
                    if lanes[atom] != 0 {
                        key += stride_of_atom[atom];
                    } else {
                        key -= stride_of_atom[atom];
                    }
                }
                let mut models = flat.eval(&lanes) & valid;
                while models != 0 {
                    let lane = models.trailing_zeros() as usize;
                    models &= models - 1;
                    hist.bump(key + lane_key[lane]);
                }
            }
            hist
        })
        .reduce(|| Buckets::new(space), Buckets::merge)
        .into_map();
    CountHistogram { base, radix, buckets }
}

/// Weighted model count of `input` over the domain `{1, ..., n}`.
///
/// The order predicate, if declared, is fixed to the natural order; its
/// atoms still contribute their weights. Refuses when the Herbrand base
/// exceeds the budget.
pub fn oracle_wfomc(input: &ProblemInput, n: u32, budget: OracleBudget) -> Result<Rational> {
    if n == 0 {
        return Err(Error::Invalid("domain size must be at least 1".into()));
    }
    let base = HerbrandBase::new(&input.signature, input.order.as_deref(), n);
    budget.check(base.len())?;
    let prop = ground(&input.sentence, &base);
    let hist = enumerate(&prop, base);
    let preds = hist.base.predicates().to_vec();

    let mut powers: Vec<Vec<Rational>> = Vec::with_capacity(preds.len());
    let mut targets: Vec<Option<u32>> = Vec::with_capacity(preds.len());
    for (p, arity, _) in &preds {
        let size = n.pow(*arity as u32);
        let (w, wb) = input.weights.get(p);
        powers.push(
            (0..=size)
                .map(|c| pow(&w, c) * pow(&wb, size - c))
                .collect(),
        );
        let mut target = None;
        for c in input.cardinality.iter().filter(|c| &c.pred == p) {
            let t = c.target.at(n);
            if target.is_some_and(|old| old != t) {
                return Ok(Rational::zero());
            }
            target = Some(t);
        }
        targets.push(target);
    }

    let mut total = Rational::zero();
    for (&key, &models) in &hist.buckets {
        let counts = hist.decode(key);
        if counts.iter().zip(&targets).any(|(c, t)| t.is_some_and(|t| t != *c)) {
            continue;
        }
        let mut w = Rational::from_integer(BigInt::from(models));
        for (pi, &c) in counts.iter().enumerate() {
            w *= &powers[pi][c as usize];
        }
        total += w;
    }

    if let Some(order) = &input.order {
        let (w, wb) = input.weights.get(order);
        let n = n as u64;
        let trues = n * (n + 1) / 2;
        for c in input.cardinality.iter().filter(|c| &c.pred == order) {
            if c.target.at(n as u32) as u64 != trues {
                return Ok(Rational::zero());
            }
        }
        total *= pow(&w, trues as u32) * pow(&wb, (n * n - trues) as u32);
    }
    Ok(total)
}

/// Weighted model count as a [`WeightValue`] without indeterminates.
pub fn oracle_weight(input: &ProblemInput, n: u32, budget: OracleBudget) -> Result<WeightValue> {
    Ok(WeightValue::constant(oracle_wfomc(input, n, budget)?, 0))
}

/// Weighted histogram of the configurations realized by the models of
/// `forall x: forall y: psi` over `n` elements, keyed like the engine's
/// layer tables. Models where an element exceeds a counting bound are
/// dropped; modulo axes are reduced. Needs a problem without cardinality
/// constraints.
pub fn configuration_histogram(
    problem: &NormalizedProblem,
    cells: &CellTable<Rational>,
    n: u32,
    budget: OracleBudget,
) -> Result<Layer<Rational>> {
    if !problem.cardinality.is_empty() {
        return Err(Error::Invalid("configuration histogram needs constant weights".into()));
    }
    let base = HerbrandBase::new(&problem.signature, problem.order.as_deref(), n);
    budget.check(base.len())?;
    let prop = ground(&Formula::forall_xy(problem.psi.clone()), &base);
    let order = problem.order.as_deref();
    let holds = |bits: u64, pred: &str, args: &[u32]| -> bool {
        if Some(pred) == order {
            return args[0] <= args[1];
        }
        bits >> base.index(pred, args).expect("predicate in signature") & 1 == 1
    };
    let atom_weights: Vec<(Rational, Rational)> = base
        .predicates()
        .iter()
        .flat_map(|(p, a, _)| std::iter::repeat_n(problem.weights.get(p), (n as usize).pow(*a as u32)))
        .collect();
    let order_factor = match order {
        Some(o) => {
            let (w, wb) = problem.weights.get(o);
            let n = n as u64;
            pow(&w, (n * (n + 1) / 2) as u32) * pow(&wb, (n * (n - 1) / 2) as u32)
        }
        None => Rational::one(),
    };
    let c_size = cells.space.size() as usize;
    let counting: Vec<&str> = problem
        .binary_counting
        .iter()
        .map(|c| c.pred.as_str())
        .chain(problem.binary_modulo.iter().map(|c| c.pred.as_str()))
        .collect();

    let mut out = Layer::default();
    'models: for bits in 0..(1u64 << base.len()) {
        if !prop.eval(bits) {
            continue;
        }
        let mut config = vec![0u16; cells.len() * c_size];
        for x in 0..n {
            let mut t = 0u64;
            for (s, p) in cells.unary_preds.iter().enumerate() {
                t |= (holds(bits, p, &[x]) as u64) << s;
            }
            let nu = cells.unary_preds.len();
            for (r, p) in cells.binary_preds.iter().enumerate() {
                t |= (holds(bits, p, &[x, x]) as u64) << (nu + r);
            }
            let l = cells.one_type_index(t).expect("models realize valid 1-types");
            let mut digits = Vec::with_capacity(counting.len());
            for (axis, p) in cells.space.axes.iter().zip(&counting) {
                let witnesses = (0..n).filter(|&y| holds(bits, p, &[x, y])).count() as u32;
                match axis.add(0, witnesses) {
                    Some(d) => digits.push(d),
                    None => continue 'models,
                }
            }
            config[l * c_size + cells.space.encode(&digits) as usize] += 1;
        }
        let mut w = order_factor.clone();
        for (i, (wt, wb)) in atom_weights.iter().enumerate() {
            w *= if bits >> i & 1 == 1 { wt } else { wb };
        }
        let key: Config = config.into_boxed_slice();
        *out.entry(key).or_insert_with(Rational::zero) += w;
    }
    out.retain(|_, w| !w.is_zero());
    Ok(out)
}

fn pow(r: &Rational, e: u32) -> Rational {
    if e == 0 {
        return Rational::one();
    }
    num_traits::pow(r.clone(), e as usize)
}
