//! Benchmark families, domain-size sweeps and the odd-degree count table.

use crate::arith::{factorial, format_rational, Rational};
use crate::engine::{self, branch_values, SweepOptions, SweepRow};
use crate::logic::{parse_problem, CardTarget, ProblemInput};
use crate::normalize::{divisor_product, normalize};
use crate::oracle::oracle_wfomc;
use crate::{Error, Result};
use num_traits::Zero;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

/// A named sentence family.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub about: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset { name: "k-regular", params: &["k"], about: "undirected graphs where every vertex has degree k" },
    Preset {
        name: "k-regular-l-colored",
        params: &["k", "l"],
        about: "k-regular graphs with a proper l-vertex-coloring",
    },
    Preset { name: "k-regular-digraph", params: &["k"], about: "digraphs with out-degree and in-degree k" },
    Preset { name: "ba", params: &["k"], about: "Barabasi-Albert graphs, equality by |Eq| = n" },
    Preset { name: "ba-nocc", params: &["k"], about: "Barabasi-Albert graphs, equality from the order" },
    Preset { name: "r-mod-k-regular", params: &["r", "k"], about: "graphs where every degree is r mod k" },
    Preset { name: "m-odd-degree", params: &["m", "k"], about: "graphs with k edges and exactly m odd-degree vertices" },
    Preset {
        name: "m-odd-degree-nf",
        params: &["m", "k"],
        about: "m-odd-degree, given directly in normal form",
    },
];

/// Parameter values: a plain integer or a multiple of the domain size
/// (`k=2n`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params(BTreeMap<String, CardTarget>);

impl Params {
    /// Parses `k=3,l=2` (commas or whitespace).
    pub fn parse(text: &str) -> Result<Params> {
        let mut out = BTreeMap::new();
        for item in text.split([',', ' ']).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("expected key=value, got `{item}`")))?;
            out.insert(key.trim().to_string(), parse_value(value.trim())?);
        }
        Ok(Params(out))
    }

    pub fn set(mut self, key: &str, value: u32) -> Self {
        self.0.insert(key.to_string(), CardTarget::fixed(value));
        self
    }

    fn target(&self, key: &str) -> Result<CardTarget> {
        self.0.get(key).copied().ok_or_else(|| Error::Invalid(format!("missing parameter `{key}`")))
    }

    fn int(&self, key: &str) -> Result<u32> {
        let t = self.target(key)?;
        if t.per_n != 0 {
            return Err(Error::Invalid(format!("parameter `{key}` must be a constant")));
        }
        Ok(t.offset)
    }
}

fn parse_value(v: &str) -> Result<CardTarget> {
    let bad = || Error::Invalid(format!("bad parameter value `{v}`"));
    match v.strip_suffix('n') {
        Some("") => Ok(CardTarget { per_n: 1, offset: 0 }),
        Some(a) => Ok(CardTarget { per_n: a.parse().map_err(|_| bad())?, offset: 0 }),
        None => Ok(CardTarget::fixed(v.parse().map_err(|_| bad())?)),
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Correction applied to the engine's count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Postprocess {
    None,
    /// Divide by `n`.
    DivideN,
    /// Divide by `n!`.
    DivideFactorial,
}

impl Postprocess {
    pub fn apply(self, value: Rational, n: u32) -> Rational {
        match self {
            Postprocess::None => value,
            Postprocess::DivideN => value / Rational::from_integer(n.into()),
            Postprocess::DivideFactorial => value / Rational::from_integer(factorial(n as u64)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub preset: &'static str,
    pub params: Params,
    pub input: ProblemInput,
    pub postprocess: Postprocess,
}

const GRAPH: &str = "forall x: ~E(x,x)\nforall x: forall y: E(x,y) -> E(y,x)\n";

/// Expands a preset into a problem.
pub fn preset(name: &str, params: &Params) -> Result<Benchmark> {
    let found = PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Invalid(format!("unknown preset `{name}`")))?;
    for key in params.0.keys() {
        if !found.params.contains(&key.as_str()) {
            return Err(Error::Invalid(format!("preset `{name}` has no parameter `{key}`")));
        }
    }
    let mut postprocess = Postprocess::None;
    let text = match name {
        "k-regular" => format!("{GRAPH}forall x: exists[={}] y: E(x,y)\n", params.int("k")?),
        "k-regular-l-colored" => {
            let (k, l) = (params.int("k")?, params.int("l")?);
            if l == 0 {
                return Err(Error::Invalid("l must be at least 1".into()));
            }
            let colors: Vec<String> = (1..=l).map(|i| format!("C{i}")).collect();
            let mut s = format!("{GRAPH}forall x: exists[={k}] y: E(x,y)\n");
            let any: Vec<String> = colors.iter().map(|c| format!("{c}(x)")).collect();
            s += &format!("forall x: {}\n", any.join(" | "));
            for i in 0..colors.len() {
                for j in i + 1..colors.len() {
                    s += &format!("forall x: ~{}(x) | ~{}(x)\n", colors[i], colors[j]);
                }
            }
            let clash: Vec<String> = colors.iter().map(|c| format!("~({c}(x) & {c}(y))")).collect();
            s += &format!("forall x: forall y: E(x,y) -> {}\n", clash.join(" & "));
            s
        }
        "k-regular-digraph" => {
            let k = params.int("k")?;
            format!("forall x: ~E(x,x)\nforall x: exists[={k}] y: E(x,y)\nforall x: exists[={k}] y: E(y,x)\n")
        }
        "ba" | "ba-nocc" => {
            let k = params.int("k")?;
            let mut s = String::from("order LEQ\nforall x: Eq(x,x) & ~R(x,x)\n");
            if name == "ba" {
                s += "card |Eq| = n\n";
            } else {
                s += "forall x: forall y: Eq(x,y) <-> (x <= y & y <= x)\n";
            }
            s += &format!("exists[={}] x: K(x)\n", k + 1);
            s += "forall x: forall y: K(x) & K(y) & ~Eq(x,y) -> R(x,y)\n";
            s += &format!("forall x: exists[={k}] y: R(x,y)\n");
            s += "forall x: forall y: R(x,y) & ~(K(x) & K(y)) -> y <= x\n";
            s += "forall x: forall y: K(x) & ~K(y) -> x <= y\n";
            s
        }
        "r-mod-k-regular" => {
            let (r, k) = (params.int("r")?, params.int("k")?);
            if k == 0 || r >= k {
                return Err(Error::Invalid("r-mod-k-regular needs 0 <= r < k".into()));
            }
            format!("{GRAPH}forall x: exists[={r} mod {k}] y: E(x,y)\n")
        }
        "m-odd-degree" | "m-odd-degree-nf" => {
            let m = params.int("m")?;
            let k = params.target("k")?;
            let edges = CardTarget { per_n: 2 * k.per_n, offset: 2 * k.offset };
            if name == "m-odd-degree" {
                format!(
                    "{GRAPH}forall x: Odd(x) <-> exists[=1 mod 2] y: E(x,y)\nexists[={m}] x: Odd(x)\ncard |E| = {edges}\n"
                )
            } else {
                postprocess = Postprocess::DivideN;
                format!(
                    "weight C 1 -1\n{GRAPH}exists[={m}] x: Odd(x)\nexists[=1] x: U(x)\n\
                     forall x: P(x) <-> (~Odd(x) & A(x) & C(x))\n\
                     forall x: forall y: P(x) & B(x,y) -> U(y)\n\
                     forall x: forall y: ~P(x) -> (B(x,y) <-> E(x,y))\n\
                     forall x: exists[=1 mod 2] y: B(x,y)\n\
                     forall x: Odd(x) | A(x)\nforall x: A(x) | C(x)\ncard |E| = {edges}\n"
                )
            }
        }
        _ => unreachable!("preset table and expansion agree"),
    };
    let input = parse_problem(&text)?;
    Ok(Benchmark { preset: found.name, params: params.clone(), input, postprocess })
}

/// One sweep row with its preset.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub preset: String,
    pub params: String,
    pub n: u32,
    pub count: String,
    pub wall_ms: u128,
    pub layer_entries: usize,
}

/// Text for a count: the value, or the reason it is missing.
pub fn count_text(row: &SweepRow) -> String {
    match &row.count {
        Some(c) => format_rational(c),
        None => row.note.clone().unwrap_or_else(|| "missing".into()),
    }
}

/// Counts the benchmark for every `n` in `lo..=hi`.
pub fn sweep(bench: &Benchmark, lo: u32, hi: u32, opts: &SweepOptions) -> Result<Vec<BenchRow>> {
    let normalized = normalize(&bench.input)?;
    let rows = engine::sweep(&normalized, lo, hi, opts)?;
    Ok(rows
        .into_iter()
        .map(|mut r| {
            r.count = r.count.map(|c| bench.postprocess.apply(c, r.n));
            BenchRow {
                preset: bench.preset.to_string(),
                params: bench.params.to_string(),
                n: r.n,
                count: count_text(&r),
                wall_ms: r.wall_ms,
                layer_entries: r.layer_entries,
            }
        })
        .collect())
}

/// Oracle count of the benchmark at `n`, postprocessed.
pub fn oracle_count(bench: &Benchmark, n: u32, opts: &SweepOptions) -> Result<Rational> {
    Ok(bench.postprocess.apply(oracle_wfomc(&bench.input, n, opts.budget)?, n))
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Model counts of graphs on `n` vertices with `m` odd-degree vertices and
/// `k` edges.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SequenceTable {
    pub n_max: u32,
    pub k_max: u32,
    #[serde(serialize_with = "serialize_counts")]
    pub counts: BTreeMap<(u32, u32, u32), Rational>,
}

fn serialize_counts<S: serde::Serializer>(
    counts: &BTreeMap<(u32, u32, u32), Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(counts.len()))?;
    for ((n, m, k), v) in counts {
        seq.serialize_element(&serde_json::json!({"n": n, "m": m, "k": k, "count": format_rational(v)}))?;
    }
    seq.end()
}

impl SequenceTable {
    pub fn get(&self, n: u32, m: u32, k: u32) -> Rational {
        self.counts.get(&(n, m, k)).cloned().unwrap_or_else(Rational::zero)
    }
}

impl fmt::Display for SequenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.counts.values().map(format_rational).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1).max(3);
        write!(f, "{:>3} {:>3}", "n", "m")?;
        for k in 0..=self.k_max {
            write!(f, " {:>width$}", format!("k={k}"))?;
        }
        writeln!(f)?;
        for n in 1..=self.n_max {
            for m in 0..=n {
                write!(f, "{n:>3} {m:>3}")?;
                for k in 0..=self.k_max {
                    let v = self.get(n, m, k);
                    let text = if v.is_zero() { String::new() } else { format_rational(&v) };
                    write!(f, " {text:>width$}")?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// `T(n, m, k)` for `n <= n_max`, `m <= n`, `k <= k_max`. One engine run per
/// `m` carries the edge count symbolically and every `k` is read off the
/// same polynomial.
pub fn sequence_table(n_max: u32, k_max: u32, opts: &SweepOptions) -> Result<SequenceTable> {
    let mut table = SequenceTable { n_max, k_max, counts: BTreeMap::new() };
    if n_max == 0 {
        return Ok(table);
    }
    for m in 0..=n_max {
        let bench = preset("m-odd-degree", &Params::default().set("m", m).set("k", k_max))?;
        let normalized = normalize(&bench.input)?;
        let lo = normalized.min_domain().max(1);
        for n in 1..lo.min(n_max + 1) {
            for k in 0..=k_max {
                let b = preset("m-odd-degree", &Params::default().set("m", m).set("k", k))?;
                let v = oracle_wfomc(&b.input, n, opts.budget)?;
                if !v.is_zero() {
                    table.counts.insert((n, m, k), v);
                }
            }
        }
        if lo > n_max {
            continue;
        }
        for branch in &normalized.branches {
            let edge = branch
                .cardinality
                .iter()
                .find(|c| c.pred == "E")
                .ok_or_else(|| Error::Invalid("edge cardinality missing from normal form".into()))?;
            let var = edge.var;
            let mut caps = vec![0u32; branch.indeterminates()];
            for c in &branch.cardinality {
                caps[c.var] = caps[c.var].max(c.target.at(n_max));
            }
            caps[var] = 2 * k_max;
            let mut failure = None;
            branch_values(branch, lo, n_max, caps, opts.deadline, |n, value, _, _| {
                let Some(div) = divisor_product(&branch.divisors, n) else { return };
                for k in 0..=k_max {
                    let mut exps = vec![0u32; branch.indeterminates()];
                    exps[var] = 2 * k;
                    let others_ok = branch.cardinality.iter().all(|c| c.var == var || c.target.at(n) == 0);
                    if !others_ok {
                        failure = Some(Error::Invalid("unexpected cardinality in edge table".into()));
                        return;
                    }
                    let raw = value.coefficient_of(&exps).expect("registry matches");
                    let v = raw * &branch.multiplier / &div;
                    if !v.is_zero() {
                        *table.counts.entry((n, m, k)).or_insert_with(Rational::zero) += v;
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
        }
    }
    table.counts.retain(|_, v| !v.is_zero());
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    fn counts(name: &str, params: &str, lo: u32, hi: u32) -> Vec<String> {
        let b = preset(name, &Params::parse(params).unwrap()).unwrap();
        sweep(&b, lo, hi, &SweepOptions::default()).unwrap().into_iter().map(|r| r.count).collect()
    }

    #[test]
    fn params_parse() {
        let p = Params::parse("m=2,k=2n").unwrap();
        assert_eq!(p.to_string(), "k=2n,m=2");
        assert!(Params::parse("k").is_err());
        assert!(Params::parse("k=x").is_err());
    }

    #[test]
    fn unknown_presets_and_params() {
        assert!(preset("petersen", &Params::default()).is_err());
        assert!(preset("k-regular", &Params::parse("q=1").unwrap()).is_err());
        assert!(preset("k-regular", &Params::default()).is_err());
        assert!(preset("r-mod-k-regular", &Params::parse("r=2,k=2").unwrap()).is_err());
    }

    #[test]
    fn regular_rows() {
        assert_eq!(counts("k-regular", "k=3", 4, 6), ["1", "0", "70"]);
        assert_eq!(counts("k-regular", "k=2", 3, 3), ["1"]);
    }

    #[test]
    fn every_preset_expands() {
        for p in PRESETS {
            let params = match p.name {
                "k-regular-l-colored" => "k=2,l=2",
                "r-mod-k-regular" => "r=0,k=2",
                "m-odd-degree" | "m-odd-degree-nf" => "m=2,k=1",
                _ => "k=1",
            };
            let b = preset(p.name, &Params::parse(params).unwrap()).unwrap();
            normalize(&b.input).unwrap();
        }
    }

    #[test]
    fn odd_degree_forms_agree() {
        for n in 2..=4 {
            let direct = counts("m-odd-degree", "m=2,k=2", n, n);
            let nf = counts("m-odd-degree-nf", "m=2,k=2", n, n);
            assert_eq!(direct, nf, "n = {n}");
        }
    }

    #[test]
    fn small_table() {
        let t = sequence_table(4, 3, &SweepOptions::default()).unwrap();
        assert_eq!(t.get(4, 2, 1), int(6));
        assert_eq!(t.get(4, 0, 3), int(4));
        assert_eq!(t.get(4, 2, 2), int(12));
        assert_eq!(t.get(4, 4, 2), int(3));
        assert_eq!(t.get(3, 0, 0), int(1));
        assert!(t.counts.keys().all(|&(_, m, _)| m % 2 == 0));
    }

    #[test]
    fn csv_is_stable() {
        let b = preset("k-regular", &Params::parse("k=2").unwrap()).unwrap();
        let mut rows = sweep(&b, 3, 5, &SweepOptions::default()).unwrap();
        rows.iter_mut().for_each(|r| r.wall_ms = 0);
        let mut a = Vec::new();
        write_csv(&rows, &mut a).unwrap();
        let text = String::from_utf8(a).unwrap();
        assert_eq!(
            text,
            "preset,params,n,count,wall_ms,layer_entries\n\
             k-regular,k=2,3,1,0,4\nk-regular,k=2,4,3,0,3\nk-regular,k=2,5,12,0,1\n"
        );
    }
}
