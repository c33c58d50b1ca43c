//! The counting dynamic program.
//!
//! The domain is grown one element at a time. A state is a configuration:
//! how many existing elements realize each pair (1-type, c-type), where the
//! c-type records the element's witness counts for each binary counting or
//! modulo constraint. Layer `h` maps each configuration of `h` elements to
//! the total weight of the partial models producing it.
//!
//! Inserting an element of 1-type `l` picks a 2-table with every existing
//! element. For a group of `d` existing elements sharing a c1-type only the
//! summary of those choices matters: the new element's increment `u` and a
//! histogram `U` of the increments received by the group. The weights of
//! all summaries for `d` elements are tabulated once per (l, j, d) and
//! extended one element at a time.

use crate::arith::{Rational, Weight, WeightValue};
use crate::cells::{CellTable, OVERFLOW};
use crate::normalize::{divisor_product, Normalized, NormalizedProblem};
use crate::oracle::{oracle_wfomc, OracleBudget};
use crate::{Error, Result};
use num_traits::{One, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use std::time::Instant;

/// Element counts indexed by `1-type * |c-types| + c-type`.
pub type Config = Box<[u16]>;

/// Layer table: configuration to weight.
pub type Layer<W> = FxHashMap<Config, W>;

/// Histogram over increment bit-vectors, sorted by bit-vector.
pub type Histogram = Vec<(u32, u32)>;

/// Summaries `(u, U, weight)` for one (l, j, d).
pub type Summaries<W> = Vec<(u32, Histogram, W)>;

pub struct Engine<'a, W> {
    pub problem: &'a NormalizedProblem,
    pub cells: &'a CellTable<W>,
    /// Domain size the pruning is sound for.
    pub n_max: u32,
    caps: Vec<u32>,
    vars: usize,
    f_cache: Vec<Vec<Vec<Summaries<W>>>>,
}

impl<'a, W: Weight> Engine<'a, W> {
    /// `caps` bounds the exponent of each cardinality indeterminate.
    pub fn new(problem: &'a NormalizedProblem, cells: &'a CellTable<W>, n_max: u32, caps: Vec<u32>) -> Self {
        assert!(n_max <= u16::MAX as u32, "domain too large");
        let p = cells.len();
        let vars = problem.indeterminates();
        let f_cache = vec![vec![Vec::new(); p]; p];
        Engine { problem, cells, n_max, caps, vars, f_cache }
    }

    fn c_size(&self) -> usize {
        self.cells.space.size() as usize
    }

    fn dims(&self) -> usize {
        self.cells.len() * self.c_size()
    }

    fn one(&self) -> W {
        W::from_rational(&Rational::one(), self.vars)
    }

    /// Summaries for `d` existing elements of 1-type `j` and a new element
    /// of 1-type `l`, extending the cached tables as needed.
    pub fn f_table(&mut self, l: usize, j: usize, d: usize) -> &Summaries<W> {
        self.extend_f(l, j, d);
        &self.f_cache[l][j][d]
    }

    fn extend_f(&mut self, l: usize, j: usize, d: usize) {
        if self.f_cache[l][j].is_empty() {
            let base = vec![(0, Vec::new(), self.one())];
            self.f_cache[l][j].push(base);
        }
        while self.f_cache[l][j].len() <= d {
            let prev = self.f_cache[l][j].last().unwrap();
            let next = f_step(prev, &self.cells.grouped[l][j], self.cells, &self.caps);
            self.f_cache[l][j].push(next);
        }
    }

    /// Summaries computed from scratch without the cache.
    pub fn f_table_fresh(&self, l: usize, j: usize, d: usize) -> Summaries<W> {
        let mut h = vec![(0, Vec::new(), self.one())];
        for _ in 0..d {
            h = f_step(&h, &self.cells.grouped[l][j], self.cells, &self.caps);
        }
        h
    }

    fn ensure_f(&mut self, d: usize) {
        let p = self.cells.len();
        for l in 0..p {
            for j in 0..p {
                self.extend_f(l, j, d);
            }
        }
    }

    /// The configurations reachable from `prev` by inserting an element of
    /// 1-type `l`, with their extension weights (excluding `l`'s own
    /// weight). Existing c1-types are folded in the order given by `order`
    /// (indices into the non-zero entries of `prev`), or ascending.
    pub fn extension_table(&mut self, prev: &[u16], l: usize, order: Option<&[usize]>) -> Layer<W> {
        let max = prev.iter().copied().max().unwrap_or(0) as usize;
        self.ensure_f(max);
        self.extension_cached(prev, l, order)
    }

    fn extension_cached(&self, prev: &[u16], l: usize, order: Option<&[usize]>) -> Layer<W> {
        let c_size = self.c_size();
        let space = &self.cells.space;
        let present: Vec<usize> = (0..prev.len()).filter(|&b| prev[b] > 0).collect();
        let sequence: Vec<usize> = match order {
            Some(o) => o.iter().map(|&i| present[i]).collect(),
            None => present,
        };
        if self.cells.self_increment[l] == OVERFLOW {
            return Layer::default();
        }
        let zero: Config = vec![0u16; prev.len()].into_boxed_slice();
        let mut g: FxHashMap<(u32, Config), W> = FxHashMap::default();
        g.insert((self.cells.self_increment[l], zero), self.one());
        for beta in sequence {
            let (j, c) = (beta / c_size, (beta % c_size) as u32);
            let summaries = &self.f_cache[l][j][prev[beta] as usize];
            let mut next: FxHashMap<(u32, Config), W> = FxHashMap::default();
            for ((ustar, kstar), gw) in &g {
                'summary: for (u, hist, hw) in summaries {
                    let nu = space.plus(*ustar, *u);
                    if nu == OVERFLOW {
                        continue;
                    }
                    let mut k = kstar.clone();
                    for &(sigma, cnt) in hist {
                        let c2 = space.plus_bits(c, sigma);
                        if c2 == OVERFLOW {
                            continue 'summary;
                        }
                        k[j * c_size + c2 as usize] += cnt as u16;
                    }
                    let w = gw.mul_capped(hw, &self.caps);
                    if w.is_zero() {
                        continue;
                    }
                    match next.entry((nu, k)) {
                        std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().add_assign_ref(&w),
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(w);
                        }
                    }
                }
            }
            next.retain(|_, w| !w.is_zero());
            g = next;
        }
        let mut out = Layer::default();
        for ((ustar, mut k), w) in g {
            k[l * c_size + ustar as usize] += 1;
            add_entry(&mut out, k, w);
        }
        out
    }

    /// Layer 1: one element of each 1-type.
    pub fn base_layer(&self) -> Layer<W> {
        let mut out = Layer::default();
        for l in 0..self.cells.len() {
            if self.cells.self_increment[l] == OVERFLOW {
                continue;
            }
            let mut k = vec![0u16; self.dims()];
            k[l * self.c_size() + self.cells.self_increment[l] as usize] = 1;
            let w = &self.cells.one_type_weights[l];
            if !w.is_zero() {
                out.insert(k.into_boxed_slice(), w.clone());
            }
        }
        out.retain(|k, _| self.viable(k, 1));
        out
    }

    /// Layer `h` from layer `h - 1`.
    pub fn layer_step(&mut self, prev: &Layer<W>, h: u32) -> Layer<W> {
        self.ensure_f(h as usize - 1);
        let this = &*self;
        let entries: Vec<(&Config, &W)> = prev.iter().collect();
        let merge = |mut a: Layer<W>, b: Layer<W>| {
            if a.len() < b.len() {
                return merge_into(b, a);
            }
            for (k, w) in b {
                add_entry(&mut a, k, w);
            }
            a
        };
        let mut next = entries
            .par_iter()
            .fold(Layer::default, |mut acc, (kprev, t)| {
                for l in 0..this.cells.len() {
                    let tw = t.mul_capped(&this.cells.one_type_weights[l], &this.caps);
                    if tw.is_zero() {
                        continue;
                    }
                    for (k, f) in this.extension_cached(kprev, l, None) {
                        if !this.viable(&k, h) {
                            continue;
                        }
                        add_entry(&mut acc, k, tw.mul_capped(&f, &this.caps));
                    }
                }
                acc
            })
            .reduce(Layer::default, merge);
        next.retain(|_, w| !w.is_zero());
        next
    }

    /// Whether a configuration of `h` elements can still reach an accepted
    /// configuration by domain size `n_max`.
    fn viable(&self, k: &[u16], h: u32) -> bool {
        let remaining = self.n_max.saturating_sub(h);
        let c_size = self.c_size();
        for (i, &cnt) in k.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            let digits = self.cells.space.digits((i % c_size) as u32);
            for (axis, &d) in self.cells.space.axes.iter().zip(digits) {
                if axis.deficit(d) > remaining {
                    return false;
                }
            }
        }
        for (m, c) in self.problem.unary_counting.iter().enumerate() {
            let mass = self.mass(k, m);
            if mass > c.k || (c.cmp == crate::logic::Cmp::Eq && c.k - mass > remaining) {
                return false;
            }
        }
        true
    }

    fn mass(&self, k: &[u16], constraint: usize) -> u32 {
        let c_size = self.c_size();
        let members = &self.cells.unary_members[constraint];
        k.iter()
            .enumerate()
            .filter(|(i, _)| members[i / c_size])
            .map(|(_, &c)| c as u32)
            .sum()
    }

    /// Whether a configuration of the full domain satisfies every
    /// counting and modulo constraint.
    pub fn accept(&self, k: &[u16]) -> bool {
        let c_size = self.c_size();
        for (i, &cnt) in k.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            let digits = self.cells.space.digits((i % c_size) as u32);
            if !self.cells.space.axes.iter().zip(digits).all(|(a, &d)| a.accepts(d)) {
                return false;
            }
        }
        let nc = self.problem.unary_counting.len();
        for (m, c) in self.problem.unary_counting.iter().enumerate() {
            if !c.cmp.holds(self.mass(k, m) as u64, c.k as u64) {
                return false;
            }
        }
        for (m, c) in self.problem.unary_modulo.iter().enumerate() {
            let mass = self.mass(k, nc + m) % c.k;
            if !c.cmp.holds(mass as u64, c.r as u64) {
                return false;
            }
        }
        true
    }

    /// Sum of a layer over accepted configurations.
    pub fn accepted_sum(&self, layer: &Layer<W>) -> W {
        let mut acc = W::from_rational(&Rational::zero(), self.vars);
        let mut keys: Vec<&Config> = layer.keys().filter(|k| self.accept(k)).collect();
        keys.sort();
        for k in keys {
            acc.add_assign_ref(&layer[k]);
        }
        acc
    }

    /// Runs layers `1..=n_max`, reporting the accepted sum of every layer
    /// from `lo` on. Stops with [`Error::Timeout`] past the deadline.
    pub fn run(
        &mut self,
        lo: u32,
        deadline: Option<Instant>,
        mut report: impl FnMut(u32, W, usize),
    ) -> Result<()> {
        let start = Instant::now();
        let mut layer = self.base_layer();
        for h in 1..=self.n_max {
            if h > 1 {
                if deadline.is_some_and(|d| Instant::now() > d) {
                    return Err(Error::Timeout(start.elapsed().as_millis()));
                }
                layer = self.layer_step(&layer, h);
            }
            if h >= lo {
                report(h, self.accepted_sum(&layer), layer.len());
            }
        }
        Ok(())
    }

    /// The full layer table for `n` elements (pruned for `n_max`).
    pub fn layer(&mut self, n: u32) -> Layer<W> {
        let mut layer = self.base_layer();
        for h in 2..=n {
            layer = self.layer_step(&layer, h);
        }
        layer
    }
}

fn add_entry<W: Weight>(layer: &mut Layer<W>, k: Config, w: W) {
    match layer.entry(k) {
        std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().add_assign_ref(&w),
        std::collections::hash_map::Entry::Vacant(e) => {
            e.insert(w);
        }
    }
}

fn merge_into<W: Weight>(mut a: Layer<W>, b: Layer<W>) -> Layer<W> {
    for (k, w) in b {
        add_entry(&mut a, k, w);
    }
    a
}

/// One more existing element: fold every grouped pair weight into every
/// summary.
fn f_step<W: Weight>(
    prev: &Summaries<W>,
    grouped: &[(u32, u32, W)],
    cells: &CellTable<W>,
    caps: &[u32],
) -> Summaries<W> {
    let space = &cells.space;
    let mut next: FxHashMap<(u32, Histogram), W> = FxHashMap::default();
    for (u, hist, w) in prev {
        for (t, t2, r) in grouped {
            let nu = space.plus_bits(*u, *t);
            if nu == OVERFLOW {
                continue;
            }
            let mut h = hist.clone();
            match h.binary_search_by_key(t2, |e| e.0) {
                Ok(i) => h[i].1 += 1,
                Err(i) => h.insert(i, (*t2, 1)),
            }
            let v = w.mul_capped(r, caps);
            match next.entry((nu, h)) {
                std::collections::hash_map::Entry::Occupied(mut e) => e.get_mut().add_assign_ref(&v),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(v);
                }
            }
        }
    }
    let mut out: Summaries<W> =
        next.into_iter().filter(|(_, w)| !w.is_zero()).map(|((u, h), w)| (u, h, w)).collect();
    out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    out
}

/// `2 * (number of c1-types) + 2^(number of axes) - 2`, the degree of the
/// polynomial bounding the running time in the domain size.
pub fn complexity_exponent<W: Weight>(cells: &CellTable<W>) -> u32 {
    let d = cells.len() as u32 * cells.space.size();
    2 * d + (1u32 << cells.space.axes.len()) - 2
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: u32,
    /// `None` when the row timed out or was refused; see `note`.
    pub count: Option<Rational>,
    /// Cumulative milliseconds spent when the row was produced.
    pub wall_ms: u128,
    /// Entries of the final layer table, summed over branches.
    pub layer_entries: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub deadline: Option<Instant>,
    pub budget: OracleBudget,
}

/// The per-branch accepted sums, before coefficient extraction, for every
/// `n` in `lo..=hi`.
pub fn branch_values(
    branch: &NormalizedProblem,
    lo: u32,
    hi: u32,
    caps: Vec<u32>,
    deadline: Option<Instant>,
    mut report: impl FnMut(u32, WeightValue, usize, u128),
) -> Result<()> {
    let start = Instant::now();
    let vars = branch.indeterminates();
    if vars == 0 {
        let cells = CellTable::<Rational>::new(branch)?;
        let mut engine = Engine::new(branch, &cells, hi, caps);
        engine.run(lo, deadline, |n, w, e| {
            report(n, w.into_weight_value(0), e, start.elapsed().as_millis())
        })
    } else {
        let cells = CellTable::<WeightValue>::new(branch)?;
        let mut engine = Engine::new(branch, &cells, hi, caps);
        engine.run(lo, deadline, |n, w, e| report(n, w, e, start.elapsed().as_millis()))
    }
}

/// Reads the branch's count at `n` off its accepted sum.
pub fn branch_count(branch: &NormalizedProblem, n: u32, value: &WeightValue) -> Rational {
    let mut exps = vec![0u32; branch.indeterminates()];
    let mut seen = vec![false; exps.len()];
    for c in &branch.cardinality {
        let t = c.target.at(n);
        if seen[c.var] && exps[c.var] != t {
            return Rational::zero();
        }
        seen[c.var] = true;
        exps[c.var] = t;
    }
    let raw = value.coefficient_of(&exps).expect("registry matches");
    match divisor_product(&branch.divisors, n) {
        Some(d) => raw * &branch.multiplier / d,
        None => Rational::zero(),
    }
}

/// Counts for every `n` in `lo..=hi`, reusing layers across `n`. Domain
/// sizes too small for the normal form's divisors go to the oracle.
pub fn sweep(normalized: &Normalized, lo: u32, hi: u32, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    if lo == 0 || lo > hi {
        return Err(Error::Invalid(format!("bad domain range {lo}..{hi}")));
    }
    let start = Instant::now();
    let mut rows: Vec<SweepRow> = (lo..=hi)
        .map(|n| SweepRow { n, count: Some(Rational::zero()), wall_ms: 0, layer_entries: 0, note: None })
        .collect();
    let engine_lo = lo.max(normalized.min_domain()).max(1);
    for row in rows.iter_mut().filter(|r| r.n < engine_lo) {
        match oracle_wfomc(&normalized.input, row.n, opts.budget) {
            Ok(v) => {
                row.count = Some(v);
                row.note = Some("oracle".into());
            }
            Err(e) => return Err(e),
        }
        row.wall_ms = start.elapsed().as_millis();
    }
    if engine_lo > hi {
        return Ok(rows);
    }
    for branch in &normalized.branches {
        let caps: Vec<u32> = {
            let mut caps = vec![0u32; branch.indeterminates()];
            for c in &branch.cardinality {
                caps[c.var] = caps[c.var].max(c.target.at(hi));
            }
            caps
        };
        let offset = start.elapsed().as_millis();
        let mut reported = vec![false; rows.len()];
        let result = branch_values(branch, engine_lo, hi, caps, opts.deadline, |n, value, entries, ms| {
            let i = (n - lo) as usize;
            let row = &mut rows[i];
            if let Some(c) = row.count.as_mut() {
                *c += branch_count(branch, n, &value);
            }
            row.layer_entries += entries;
            row.wall_ms = offset + ms;
            reported[i] = true;
        });
        match result {
            Ok(()) => {}
            Err(Error::Timeout(_)) => {
                let now = start.elapsed().as_millis();
                for (row, done) in rows.iter_mut().zip(&reported) {
                    if row.n >= engine_lo && !done {
                        row.count = None;
                        row.note = Some("timeout".into());
                        row.wall_ms = now;
                    }
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

/// Size of one layer table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTrace {
    pub branch: usize,
    pub h: u32,
    pub entries: usize,
    pub wall_ms: u128,
}

/// Layer sizes of every branch on the way to domain size `n`.
pub fn trace_layers(normalized: &Normalized, n: u32, deadline: Option<Instant>) -> Result<Vec<LayerTrace>> {
    let mut out = Vec::new();
    for (i, branch) in normalized.branches.iter().enumerate() {
        let mut caps = vec![0u32; branch.indeterminates()];
        for c in &branch.cardinality {
            caps[c.var] = caps[c.var].max(c.target.at(n));
        }
        branch_values(branch, 1, n, caps, deadline, |h, _, entries, wall_ms| {
            out.push(LayerTrace { branch: i, h, entries, wall_ms })
        })?;
    }
    Ok(out)
}

/// Exact count at a single domain size.
pub fn count(normalized: &Normalized, n: u32, opts: &SweepOptions) -> Result<Rational> {
    let rows = sweep(normalized, n, n, opts)?;
    rows[0].count.clone().ok_or(Error::Timeout(rows[0].wall_ms))
}

/// The unrefined recurrence over 1-type count vectors, valid when the
/// problem has no binary counting constraints and no cardinality
/// constraints. Used as an independent cross-check.
pub fn baseline_count(branch: &NormalizedProblem, n: u32) -> Result<Rational> {
    if !branch.binary_counting.is_empty() || !branch.binary_modulo.is_empty() || !branch.cardinality.is_empty() {
        return Err(Error::Invalid("baseline needs a problem without counting axes".into()));
    }
    let cells = CellTable::<Rational>::new(branch)?;
    let p = cells.len();
    let r: Vec<Vec<Rational>> = (0..p)
        .map(|l| {
            (0..p)
                .map(|i| cells.grouped[l][i].iter().fold(Rational::zero(), |acc, g| acc + &g.2))
                .collect()
        })
        .collect();
    let mut layer: FxHashMap<Vec<u32>, Rational> = FxHashMap::default();
    for l in 0..p {
        let mut k = vec![0u32; p];
        k[l] = 1;
        layer.insert(k, cells.one_type_weights[l].clone());
    }
    for _ in 2..=n {
        let mut next: FxHashMap<Vec<u32>, Rational> = FxHashMap::default();
        for (k, t) in &layer {
            for l in 0..p {
                let mut w = t * &cells.one_type_weights[l];
                for i in 0..p {
                    w *= num_traits::pow(r[l][i].clone(), k[i] as usize);
                }
                let mut k2 = k.clone();
                k2[l] += 1;
                *next.entry(k2).or_insert_with(Rational::zero) += w;
            }
        }
        layer = next;
    }
    let nc = branch.unary_counting.len();
    let mass = |k: &[u32], m: usize| -> u32 {
        (0..p).filter(|&i| cells.unary_members[m][i]).map(|i| k[i]).sum()
    };
    let mut total = Rational::zero();
    for (k, t) in &layer {
        let ok = branch.unary_counting.iter().enumerate().all(|(m, c)| c.cmp.holds(mass(k, m) as u64, c.k as u64))
            && branch
                .unary_modulo
                .iter()
                .enumerate()
                .all(|(m, c)| c.cmp.holds((mass(k, nc + m) % c.k) as u64, c.r as u64));
        if ok {
            total += t;
        }
    }
    Ok(match divisor_product(&branch.divisors, n) {
        Some(d) => total * &branch.multiplier / d,
        None => Rational::zero(),
    })
}
