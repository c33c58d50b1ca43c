use super::Formula;
use crate::arith::{format_rational, Rational};
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt;

/// Predicate names with their arities (0, 1 or 2).
pub type Signature = BTreeMap<String, usize>;

/// Positive and negative weight per predicate; absent entries weigh (1, 1).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightTable {
    entries: BTreeMap<String, (Rational, Rational)>,
}

impl WeightTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, pred: impl Into<String>, w: Rational, wbar: Rational) {
        self.entries.insert(pred.into(), (w, wbar));
    }

    pub fn get(&self, pred: &str) -> (Rational, Rational) {
        self.entries
            .get(pred)
            .cloned()
            .unwrap_or_else(|| (Rational::one(), Rational::one()))
    }

    pub fn explicit(&self) -> impl Iterator<Item = (&String, &(Rational, Rational))> {
        self.entries.iter()
    }
}

/// Target of a cardinality constraint: `per_n * n + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CardTarget {
    pub per_n: u32,
    pub offset: u32,
}

impl CardTarget {
    pub fn fixed(d: u32) -> Self {
        CardTarget { per_n: 0, offset: d }
    }

    pub fn at(self, n: u32) -> u32 {
        self.per_n * n + self.offset
    }
}

impl fmt::Display for CardTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.per_n, self.offset) {
            (0, d) => write!(f, "{d}"),
            (1, 0) => write!(f, "n"),
            (a, 0) => write!(f, "{a}n"),
            (1, d) => write!(f, "n+{d}"),
            (a, d) => write!(f, "{a}n+{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cardinality {
    pub pred: String,
    pub target: CardTarget,
}

/// A closed sentence together with everything needed to count it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInput {
    pub sentence: Formula,
    pub signature: Signature,
    pub cardinality: Vec<Cardinality>,
    /// Binary predicate interpreted as the linear order on the domain.
    pub order: Option<String>,
    pub weights: WeightTable,
}

impl ProblemInput {
    /// Builds a problem from a sentence, inferring the signature.
    pub fn from_sentence(sentence: Formula) -> ProblemInput {
        let mut signature = Signature::new();
        sentence.collect_predicates(&mut signature);
        ProblemInput {
            sentence,
            signature,
            cardinality: Vec::new(),
            order: None,
            weights: WeightTable::new(),
        }
    }

    pub fn with_weight(mut self, pred: &str, w: Rational, wbar: Rational) -> Self {
        self.weights.set(pred, w, wbar);
        self
    }

    pub fn with_cardinality(mut self, pred: &str, target: CardTarget) -> Self {
        self.cardinality.push(Cardinality { pred: pred.to_string(), target });
        self
    }

    pub fn with_order(mut self, pred: &str) -> Self {
        self.signature.insert(pred.to_string(), 2);
        self.order = Some(pred.to_string());
        self
    }

    /// Number of ground atoms whose truth value is not fixed in advance.
    pub fn free_atoms(&self, n: u32) -> u64 {
        self.signature
            .iter()
            .filter(|(p, _)| self.order.as_deref() != Some(p.as_str()))
            .map(|(_, &a)| (n as u64).pow(a as u32))
            .sum()
    }

    /// The problem in the sentence-file grammar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut inferred = Signature::new();
        self.sentence.collect_predicates(&mut inferred);
        for (p, a) in &self.signature {
            if Some(p) == self.order.as_ref() {
                continue;
            }
            if inferred.get(p) != Some(a) {
                out.push_str(&format!("predicate {p}/{a}\n"));
            }
        }
        if let Some(o) = &self.order {
            out.push_str(&format!("order {o}\n"));
        }
        for c in &self.cardinality {
            out.push_str(&format!("card |{}| = {}\n", c.pred, c.target));
        }
        for (p, (w, wb)) in self.weights.explicit() {
            out.push_str(&format!("weight {p} {} {}\n", format_rational(w), format_rational(wb)));
        }
        for c in self.sentence.conjuncts() {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }
}
