//! 1-types, 2-tables and the grouped pair weights of a normalized problem.
//!
//! A 1-type is a bitmask over the unary literals of the matrix: one bit per
//! unary predicate `P(x)`, then one per binary predicate `R(x,x)`. A 2-table
//! is a bitmask over binary literals: bit `2r` is `R(x,y)`, bit `2r+1` is
//! `R(y,x)`. In every pair table `x` is the element being inserted and `y`
//! an element already present.

use crate::arith::Weight;
use crate::logic::{Cmp, Formula, Var};
use crate::normalize::NormalizedProblem;
use crate::{Error, Result};
use std::fmt;

/// One c-type axis: a binary counting or modulo constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Witness count, saturating at `k` (larger counts are rejected).
    Counting { cmp: Cmp, k: u32 },
    /// Witness count modulo `k`.
    Modulo { cmp: Cmp, r: u32, k: u32 },
}

impl Axis {
    /// Number of values the axis takes.
    pub fn radix(self) -> u32 {
        match self {
            Axis::Counting { k, .. } => k + 1,
            Axis::Modulo { k, .. } => k,
        }
    }

    /// `c + s`, wrapping modulo axes; `None` past a counting bound.
    pub fn add(self, c: u32, s: u32) -> Option<u32> {
        match self {
            Axis::Counting { k, .. } => (c + s <= k).then_some(c + s),
            Axis::Modulo { k, .. } => Some((c + s) % k),
        }
    }

    /// Whether a final value is acceptable.
    pub fn accepts(self, c: u32) -> bool {
        match self {
            Axis::Counting { cmp, k } => cmp.holds(c as u64, k as u64),
            Axis::Modulo { cmp, r, .. } => cmp.holds(c as u64, r as u64),
        }
    }

    /// Fewest further witnesses that make `c` acceptable.
    pub fn deficit(self, c: u32) -> u32 {
        match self {
            Axis::Counting { cmp: Cmp::Eq, k } => k - c,
            Axis::Counting { .. } => 0,
            Axis::Modulo { cmp: Cmp::Eq, r, k } => (r + k - c) % k,
            Axis::Modulo { cmp: Cmp::Le, r, k } => if c <= r { 0 } else { k - c },
            Axis::Modulo { cmp: Cmp::Ge, r, .. } => r.saturating_sub(c),
        }
    }
}

/// The c-types of a problem, packed in mixed radix (first axis fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CTypeSpace {
    pub axes: Vec<Axis>,
    size: u32,
    digits: Vec<Vec<u32>>,
    /// `plus_bits[c][sigma]`: c-type `c` after one witness on every axis set
    /// in `sigma`; `u32::MAX` on overflow.
    plus_bits: Vec<Vec<u32>>,
}

pub const OVERFLOW: u32 = u32::MAX;

impl CTypeSpace {
    pub fn new(axes: Vec<Axis>) -> CTypeSpace {
        let size: u32 = axes.iter().map(|a| a.radix()).product();
        let mut space = CTypeSpace { axes, size, digits: Vec::new(), plus_bits: Vec::new() };
        space.digits = (0..size).map(|c| space.decode_raw(c)).collect();
        let sigmas = 1u32 << space.axes.len();
        space.plus_bits = (0..size)
            .map(|c| {
                (0..sigmas)
                    .map(|s| {
                        let d = &space.digits[c as usize];
                        let next: Option<Vec<u32>> = space
                            .axes
                            .iter()
                            .enumerate()
                            .map(|(a, axis)| axis.add(d[a], s >> a & 1))
                            .collect();
                        next.map_or(OVERFLOW, |v| space.encode(&v))
                    })
                    .collect()
            })
            .collect();
        space
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    fn decode_raw(&self, mut c: u32) -> Vec<u32> {
        self.axes
            .iter()
            .map(|a| {
                let v = c % a.radix();
                c /= a.radix();
                v
            })
            .collect()
    }

    pub fn digits(&self, c: u32) -> &[u32] {
        &self.digits[c as usize]
    }

    pub fn encode(&self, digits: &[u32]) -> u32 {
        let mut c = 0;
        for (a, &d) in self.axes.iter().zip(digits).rev() {
            c = c * a.radix() + d;
        }
        c
    }

    /// `c + sigma` for a bit-vector increment.
    #[inline]
    pub fn plus_bits(&self, c: u32, sigma: u32) -> u32 {
        self.plus_bits[c as usize][sigma as usize]
    }

    /// Axis-wise sum of two c-types; [`OVERFLOW`] past a counting bound.
    pub fn plus(&self, a: u32, b: u32) -> u32 {
        let (da, db) = (&self.digits[a as usize], &self.digits[b as usize]);
        let mut out = Vec::with_capacity(self.axes.len());
        for (i, axis) in self.axes.iter().enumerate() {
            match axis.add(da[i], db[i]) {
                Some(v) => out.push(v),
                None => return OVERFLOW,
            }
        }
        self.encode(&out)
    }

    /// The c-type of a bit-vector increment applied to zero.
    pub fn of_bits(&self, sigma: u32) -> u32 {
        self.plus_bits(0, sigma)
    }
}

/// A quantifier-free formula over fixed slots, evaluated three-valued.
#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Slot(usize),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Iff(Box<Node>, Box<Node>),
}

impl Node {
    fn compile(f: &Formula, slot: &impl Fn(&str, &[Var]) -> Node) -> Node {
        match f {
            Formula::True => Node::Const(true),
            Formula::False => Node::Const(false),
            Formula::Atom(a) => slot(&a.pred, &a.args),
            Formula::Not(g) => Node::Not(Box::new(Node::compile(g, slot))),
            Formula::And(v) => Node::And(v.iter().map(|g| Node::compile(g, slot)).collect()),
            Formula::Or(v) => Node::Or(v.iter().map(|g| Node::compile(g, slot)).collect()),
            Formula::Implies(a, b) => Node::Or(vec![
                Node::Not(Box::new(Node::compile(a, slot))),
                Node::compile(b, slot),
            ]),
            Formula::Iff(a, b) => {
                Node::Iff(Box::new(Node::compile(a, slot)), Box::new(Node::compile(b, slot)))
            }
            Formula::Quant { .. } => unreachable!("matrix is quantifier-free"),
        }
    }

    fn eval(&self, v: &[Option<bool>]) -> Option<bool> {
        match self {
            Node::Const(b) => Some(*b),
            Node::Slot(i) => v[*i],
            Node::Not(g) => g.eval(v).map(|b| !b),
            Node::And(items) => {
                let mut unknown = false;
                for g in items {
                    match g.eval(v) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                (!unknown).then_some(true)
            }
            Node::Or(items) => {
                let mut unknown = false;
                for g in items {
                    match g.eval(v) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                (!unknown).then_some(false)
            }
            Node::Iff(a, b) => Some(a.eval(v)? == b.eval(v)?),
        }
    }
}

/// Enumerates assignments of `free` slots satisfying `node`, given the
/// already fixed slots, pruning on partial assignments.
fn models(node: &Node, slots: &mut Vec<Option<bool>>, free: &[usize], out: &mut impl FnMut(&[Option<bool>])) {
    match node.eval(slots) {
        Some(false) => return,
        Some(true) if free.is_empty() => return out(slots),
        _ => {}
    }
    let Some((&s, rest)) = free.split_first() else {
        unreachable!("fully assigned formula is decided")
    };
    for v in [false, true] {
        slots[s] = Some(v);
        models(node, slots, rest, out);
    }
    slots[s] = None;
}

/// Everything the engine needs about the pairwise structure of a problem.
#[derive(Debug, Clone)]
pub struct CellTable<W> {
    pub unary_preds: Vec<String>,
    pub binary_preds: Vec<String>,
    /// Valid 1-types as bitmasks.
    pub one_types: Vec<u64>,
    pub one_type_weights: Vec<W>,
    /// c-type of an element from its own reflexive atoms.
    pub self_increment: Vec<u32>,
    /// Compatible 2-tables per (new 1-type, old 1-type).
    pub compat: Vec<Vec<Vec<u64>>>,
    /// `grouped[i][j]`: `(t, t', weight)` with `t` the new element's
    /// increments and `t'` the old element's, non-zero weights only.
    pub grouped: Vec<Vec<Vec<(u32, u32, W)>>>,
    pub space: CTypeSpace,
    /// Per unary constraint (counting first, then modulo): which 1-types
    /// make the constrained predicate true.
    pub unary_members: Vec<Vec<bool>>,
}

impl<W: Weight> CellTable<W> {
    pub fn new(problem: &NormalizedProblem) -> Result<CellTable<W>> {
        let vars = problem.indeterminates();
        let unary_preds: Vec<String> =
            problem.signature.iter().filter(|(_, &a)| a == 1).map(|(p, _)| p.clone()).collect();
        let binary_preds: Vec<String> =
            problem.signature.iter().filter(|(_, &a)| a == 2).map(|(p, _)| p.clone()).collect();
        if problem.signature.values().any(|&a| a == 0) {
            return Err(Error::Cells("nullary predicates must be expanded first".into()));
        }
        let (nu, nb) = (unary_preds.len(), binary_preds.len());
        if nu + nb > 63 || 2 * nb > 63 {
            return Err(Error::Cells("too many predicates".into()));
        }
        let order = match &problem.order {
            Some(o) => {
                if !problem.psi.mentions(o) {
                    return Err(Error::Cells(format!("order predicate {o} does not occur")));
                }
                Some(binary_preds.iter().position(|p| p == o).expect("order is binary"))
            }
            None => None,
        };

        let weight_of = |p: &str| -> (W, W) {
            let (w, wb) = problem.weights.get(p);
            let mut w = W::from_rational(&w, vars);
            if let Some(c) = problem.cardinality.iter().find(|c| c.pred == p) {
                w = w.mul_capped(&W::variable(c.var, vars), &[]);
            }
            (w, W::from_rational(&wb, vars))
        };
        let unary_w: Vec<(W, W)> = unary_preds.iter().map(|p| weight_of(p)).collect();
        let binary_w: Vec<(W, W)> = binary_preds.iter().map(|p| weight_of(p)).collect();

        // slots: [x 1-type | y 1-type | table]
        let width = nu + nb;
        let table_off = 2 * width;
        let slot = |x: bool, same: bool| {
            let unary = |p: &str| unary_preds.iter().position(|q| q == p);
            let binary = |p: &str| binary_preds.iter().position(|q| q == p);
            move |pred: &str, args: &[Var]| -> Node {
                let side = |v: Var| if (v == Var::X) == x || same { 0 } else { width };
                match args {
                    [] => unreachable!("no nullary predicates"),
                    [v] => Node::Slot(side(*v) + unary(pred).unwrap()),
                    [a, b] if a == b || same => Node::Slot(side(*a) + nu + binary(pred).unwrap()),
                    [a, _] => {
                        let r = binary(pred).unwrap();
                        let forward = (*a == Var::X) == x;
                        Node::Slot(table_off + 2 * r + if forward { 0 } else { 1 })
                    }
                    _ => unreachable!("arity at most two"),
                }
            }
        };
        let reflexive = Node::compile(&problem.psi, &slot(true, true));
        let pair = Node::And(vec![
            Node::compile(&problem.psi, &slot(true, false)),
            Node::compile(&problem.psi, &slot(false, false)),
        ]);

        let mut slots = vec![None; table_off + 2 * nb];
        let mut free: Vec<usize> = (0..width).collect();
        if let Some(o) = order {
            slots[nu + o] = Some(true);
            free.retain(|&s| s != nu + o);
        }
        let mut one_types = Vec::new();
        models(&reflexive, &mut slots, &free, &mut |v| {
            let mut bits = 0u64;
            for (s, val) in v[..width].iter().enumerate() {
                if *val == Some(true) {
                    bits |= 1 << s;
                }
            }
            one_types.push(bits);
        });
        one_types.sort_unstable();

        let one_type_weights: Vec<W> = one_types
            .iter()
            .map(|&t| {
                let mut acc = W::from_rational(&num_traits::One::one(), vars);
                for (s, (w, wb)) in unary_w.iter().chain(&binary_w).enumerate() {
                    acc = acc.mul_capped(if t >> s & 1 == 1 { w } else { wb }, &[]);
                }
                acc
            })
            .collect();

        let mut axes = Vec::new();
        let mut axis_preds = Vec::new();
        for c in &problem.binary_counting {
            axes.push(Axis::Counting { cmp: c.cmp, k: c.k });
            axis_preds.push(binary_preds.iter().position(|p| *p == c.pred).unwrap());
        }
        for c in &problem.binary_modulo {
            axes.push(Axis::Modulo { cmp: c.cmp, r: c.r, k: c.k });
            axis_preds.push(binary_preds.iter().position(|p| *p == c.pred).unwrap());
        }
        if axes.len() > 16 {
            return Err(Error::Cells("too many counting constraints".into()));
        }
        let space = CTypeSpace::new(axes);
        let bits_of = |mask: u64, shift: usize, stride: usize, off: usize| -> u32 {
            axis_preds
                .iter()
                .enumerate()
                .map(|(a, &r)| ((mask >> (off + stride * r + shift) & 1) as u32) << a)
                .sum()
        };
        let self_increment: Vec<u32> =
            one_types.iter().map(|&t| space.of_bits(bits_of(t, 0, 1, nu))).collect();

        let p = one_types.len();
        let mut compat = vec![vec![Vec::new(); p]; p];
        let mut grouped = vec![vec![Vec::new(); p]; p];
        for i in 0..p {
            for j in 0..p {
                for s in 0..width {
                    slots[s] = Some(one_types[i] >> s & 1 == 1);
                    slots[width + s] = Some(one_types[j] >> s & 1 == 1);
                }
                let mut free: Vec<usize> = (table_off..table_off + 2 * nb).collect();
                if let Some(o) = order {
                    slots[table_off + 2 * o] = Some(false);
                    slots[table_off + 2 * o + 1] = Some(true);
                    free.retain(|&s| s != table_off + 2 * o && s != table_off + 2 * o + 1);
                }
                let mut tables = Vec::new();
                models(&pair, &mut slots, &free, &mut |v| {
                    let mut bits = 0u64;
                    for (s, val) in v[table_off..].iter().enumerate() {
                        if *val == Some(true) {
                            bits |= 1 << s;
                        }
                    }
                    tables.push(bits);
                });
                tables.sort_unstable();
                let mut groups: Vec<(u32, u32, W)> = Vec::new();
                for &t in &tables {
                    let mut w = W::from_rational(&num_traits::One::one(), vars);
                    for (r, (pw, pwb)) in binary_w.iter().enumerate() {
                        w = w.mul_capped(if t >> (2 * r) & 1 == 1 { pw } else { pwb }, &[]);
                        w = w.mul_capped(if t >> (2 * r + 1) & 1 == 1 { pw } else { pwb }, &[]);
                    }
                    let key = (bits_of(t, 0, 2, 0), bits_of(t, 1, 2, 0));
                    match groups.iter_mut().find(|g| (g.0, g.1) == key) {
                        Some(g) => g.2.add_assign_ref(&w),
                        None => groups.push((key.0, key.1, w)),
                    }
                }
                groups.retain(|g| !g.2.is_zero());
                groups.sort_by_key(|g| (g.0, g.1));
                compat[i][j] = tables;
                grouped[i][j] = groups;
            }
        }

        let member = |pred: &str| -> Vec<bool> {
            let u = unary_preds.iter().position(|q| q == pred).unwrap();
            one_types.iter().map(|t| t >> u & 1 == 1).collect()
        };
        let unary_members = problem
            .unary_counting
            .iter()
            .map(|c| member(&c.pred))
            .chain(problem.unary_modulo.iter().map(|c| member(&c.pred)))
            .collect();

        Ok(CellTable {
            unary_preds,
            binary_preds,
            one_types,
            one_type_weights,
            self_increment,
            compat,
            grouped,
            space,
            unary_members,
        })
    }

    /// Number of valid 1-types.
    pub fn len(&self) -> usize {
        self.one_types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.one_types.is_empty()
    }

    /// Index of the 1-type with the given bitmask.
    pub fn one_type_index(&self, bits: u64) -> Option<usize> {
        self.one_types.binary_search(&bits).ok()
    }

    /// Readable literal list of a 1-type.
    pub fn describe_one_type(&self, i: usize) -> String {
        let t = self.one_types[i];
        let nu = self.unary_preds.len();
        let mut lits = Vec::new();
        for (s, p) in self.unary_preds.iter().enumerate() {
            lits.push(format!("{}{p}(x)", if t >> s & 1 == 1 { "" } else { "~" }));
        }
        for (r, p) in self.binary_preds.iter().enumerate() {
            lits.push(format!("{}{p}(x,x)", if t >> (nu + r) & 1 == 1 { "" } else { "~" }));
        }
        lits.join(" & ")
    }

    /// Readable literal list of a 2-table.
    pub fn describe_table(&self, t: u64) -> String {
        let mut lits = Vec::new();
        for (r, p) in self.binary_preds.iter().enumerate() {
            lits.push(format!("{}{p}(x,y)", if t >> (2 * r) & 1 == 1 { "" } else { "~" }));
            lits.push(format!("{}{p}(y,x)", if t >> (2 * r + 1) & 1 == 1 { "" } else { "~" }));
        }
        lits.join(" & ")
    }
}

impl<W: Weight + fmt::Display> fmt::Display for CellTable<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axes: {:?}", self.space.axes)?;
        writeln!(f, "c-types: {}", self.space.size())?;
        for (i, w) in self.one_type_weights.iter().enumerate() {
            writeln!(
                f,
                "1-type {i}: {}  weight {w}  self c-type {:?}",
                self.describe_one_type(i),
                self.space.digits(self.self_increment[i])
            )?;
        }
        for (i, row) in self.compat.iter().enumerate() {
            for (j, tables) in row.iter().enumerate() {
                writeln!(f, "tables {i} <- {j}: {} compatible, {} groups", tables.len(), self.grouped[i][j].len())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, Rational};
    use crate::logic::parse_problem;
    use crate::normalize::normalize;

    fn cells(text: &str) -> CellTable<Rational> {
        let n = normalize(&parse_problem(text).unwrap()).unwrap();
        assert_eq!(n.branches.len(), 1);
        CellTable::new(&n.branches[0]).unwrap()
    }

    const COLORED: &str = "forall x: (Red(x) | Black(x)) & ~(Red(x) & Black(x))\n\
                           forall x: ~E(x,x)\n\
                           forall x: forall y: E(x,y) -> E(y,x)\n\
                           forall x: forall y: E(x,y) -> ~(Red(x) & Red(y)) & ~(Black(x) & Black(y))";

    #[test]
    fn two_colored_cells() {
        let c = cells(COLORED);
        assert_eq!(c.len(), 2);
        assert_eq!(c.compat[0][1].len(), 2);
        assert_eq!(c.compat[1][0].len(), 2);
        assert_eq!(c.compat[0][0].len(), 1);
        assert_eq!(c.compat[1][1].len(), 1);
    }

    #[test]
    fn trivial_alphabets() {
        assert_eq!(cells("forall x: P(x) | ~P(x)").len(), 2);
        assert_eq!(cells("forall x: P(x) & ~P(x)").len(), 0);
        let c = cells("forall x: forall y: R(x,y) | ~R(x,y)");
        assert_eq!(c.len(), 2);
        assert!(c.compat.iter().flatten().all(|t| t.len() == 4));
    }

    #[test]
    fn symmetric_edges_group_on_diagonal() {
        let c = cells(
            "forall x: ~E(x,x)\nforall x: forall y: E(x,y) -> E(y,x)\nforall x: exists[=2] y: E(x,y)",
        );
        assert_eq!(c.len(), 1);
        let keys: Vec<(u32, u32)> = c.grouped[0][0].iter().map(|g| (g.0, g.1)).collect();
        assert_eq!(keys, vec![(0, 0), (1, 1)]);
        assert!(c.grouped[0][0].iter().all(|g| g.2 == int(1)));
    }

    #[test]
    fn no_axes_single_group() {
        let c = cells(COLORED);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(c.grouped[i][j].len(), 1);
                assert_eq!(c.grouped[i][j][0].2, int(c.compat[i][j].len() as i64));
            }
        }
    }

    #[test]
    fn order_forces_literals() {
        let c = cells("order LEQ\nforall x: forall y: LEQ(x,y) | ~LEQ(x,y)");
        assert_eq!(c.len(), 1);
        assert_eq!(c.compat[0][0].len(), 1);
        let n = normalize(&parse_problem("order LEQ\nforall x: P(x)").unwrap()).unwrap();
        assert!(CellTable::<Rational>::new(&n.branches[0]).is_err());
    }

    #[test]
    fn axis_arithmetic() {
        let s = CTypeSpace::new(vec![
            Axis::Counting { cmp: Cmp::Eq, k: 2 },
            Axis::Modulo { cmp: Cmp::Eq, r: 1, k: 2 },
        ]);
        assert_eq!(s.size(), 6);
        let c = s.encode(&[2, 1]);
        assert_eq!(s.digits(c), &[2, 1]);
        assert_eq!(s.plus_bits(c, 0b10), s.encode(&[2, 0]));
        assert_eq!(s.plus_bits(c, 0b01), OVERFLOW);
        assert_eq!(s.plus(s.encode(&[1, 1]), s.encode(&[1, 1])), s.encode(&[2, 0]));
    }
}
