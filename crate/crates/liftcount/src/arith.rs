//! Exact weights: arbitrary-precision rationals and sparse multivariate
//! polynomials over them.
//!
//! A polynomial carries the size of its indeterminate registry. Each
//! indeterminate stands for one cardinality-constrained predicate, so a
//! constraint `|P| = d` becomes "read the coefficient of `z^d`".

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("indeterminate registries differ ({left} vs {right} variables)")]
    RegistryMismatch { left: usize, right: usize },
    #[error("exponent vector has {got} entries, registry has {expected}")]
    ExponentLength { expected: usize, got: usize },
    #[error("invalid rational `{0}`")]
    Parse(String),
}

/// Parses `p`, `-p`, `p/q`. The denominator must be non-zero.
pub fn parse_rational(text: &str) -> Result<Rational, ArithError> {
    let t = text.trim();
    let bad = || ArithError::Parse(text.to_string());
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Integer form when the denominator is 1, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// The operations the counting engine needs from its value type.
///
/// Implemented by [`Rational`] (no indeterminates) and [`WeightValue`].
/// `caps` bounds the exponent of each indeterminate: terms above a cap can
/// never contribute to a coefficient we will read, so they are dropped.
pub trait Weight: Clone + Send + Sync + fmt::Debug + PartialEq {
    fn from_rational(r: &Rational, vars: usize) -> Self;
    fn variable(index: usize, vars: usize) -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign_ref(&mut self, other: &Self);
    fn mul_capped(&self, other: &Self, caps: &[u32]) -> Self;
    fn into_weight_value(self, vars: usize) -> WeightValue;
}

impl Weight for Rational {
    fn from_rational(r: &Rational, _vars: usize) -> Self {
        r.clone()
    }
    fn variable(_index: usize, _vars: usize) -> Self {
        panic!("plain rationals carry no indeterminates")
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_capped(&self, other: &Self, _caps: &[u32]) -> Self {
        self * other
    }
    fn into_weight_value(self, vars: usize) -> WeightValue {
        WeightValue::constant(self, vars)
    }
}

/// A polynomial with rational coefficients, keyed by exponent vector.
///
/// No stored coefficient is zero. With zero indeterminates this is just a
/// rational number.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeightValue {
    vars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl WeightValue {
    pub fn zero(vars: usize) -> Self {
        WeightValue { vars, terms: BTreeMap::new() }
    }

    pub fn one(vars: usize) -> Self {
        Self::constant(Rational::one(), vars)
    }

    pub fn constant(r: Rational, vars: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !Zero::is_zero(&r) {
            terms.insert(vec![0; vars], r);
        }
        WeightValue { vars, terms }
    }

    /// The polynomial `z_index`.
    pub fn var(index: usize, vars: usize) -> Self {
        assert!(index < vars, "indeterminate {index} outside registry of {vars}");
        let mut e = vec![0; vars];
        e[index] = 1;
        Self::from_terms(vars, [(e, Rational::one())]).expect("well-formed exponent")
    }

    pub fn from_terms(
        vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self, ArithError> {
        let mut out = WeightValue::zero(vars);
        for (e, c) in terms {
            if e.len() != vars {
                return Err(ArithError::ExponentLength { expected: vars, got: e.len() });
            }
            out.add_term(e, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if Zero::is_zero(&c) {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if Zero::is_zero(o.get()) {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a rational when no indeterminate occurs.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn check(&self, other: &Self) -> Result<(), ArithError> {
        if self.vars != other.vars {
            return Err(ArithError::RegistryMismatch { left: self.vars, right: other.vars });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ArithError> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ArithError> {
        self.check(other)?;
        Ok(self.mul_with_caps(other, &[]))
    }

    fn mul_with_caps(&self, other: &Self, caps: &[u32]) -> Self {
        let mut out = WeightValue::zero(self.vars);
        for (ea, ca) in &self.terms {
            'terms: for (eb, cb) in &other.terms {
                let mut e = Vec::with_capacity(self.vars);
                for v in 0..self.vars {
                    let s = ea[v] + eb[v];
                    if caps.get(v).is_some_and(|&cap| s > cap) {
                        continue 'terms;
                    }
                    e.push(s);
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `self^e` by repeated squaring; `a^0 = 1`.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = WeightValue::one(self.vars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_with_caps(&base, &[]);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_with_caps(&base, &[]);
            }
        }
        acc
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = WeightValue::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * r);
        }
        out
    }

    /// The coefficient of the monomial with the given exponents, 0 if absent.
    pub fn coefficient_of(&self, exponents: &[u32]) -> Result<Rational, ArithError> {
        if exponents.len() != self.vars {
            return Err(ArithError::ExponentLength { expected: self.vars, got: exponents.len() });
        }
        Ok(self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero))
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.vars);
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                t *= num_traits::pow(x.clone(), k as usize);
            }
            acc += t;
        }
        acc
    }
}

impl Weight for WeightValue {
    fn from_rational(r: &Rational, vars: usize) -> Self {
        WeightValue::constant(r.clone(), vars)
    }
    fn variable(index: usize, vars: usize) -> Self {
        WeightValue::var(index, vars)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_assign_ref(&mut self, other: &Self) {
        debug_assert_eq!(self.vars, other.vars);
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c.clone());
        }
    }
    fn mul_capped(&self, other: &Self, caps: &[u32]) -> Self {
        debug_assert_eq!(self.vars, other.vars);
        self.mul_with_caps(other, caps)
    }
    fn into_weight_value(self, _vars: usize) -> WeightValue {
        self
    }
}

impl Add for &WeightValue {
    type Output = WeightValue;
    /// Panics when the registries differ; use [`WeightValue::try_add`] to check.
    fn add(self, rhs: &WeightValue) -> WeightValue {
        self.try_add(rhs).expect("weight registries differ")
    }
}

impl Add for WeightValue {
    type Output = WeightValue;
    fn add(self, rhs: WeightValue) -> WeightValue {
        &self + &rhs
    }
}

impl Mul for &WeightValue {
    type Output = WeightValue;
    fn mul(self, rhs: &WeightValue) -> WeightValue {
        self.try_mul(rhs).expect("weight registries differ")
    }
}

impl Mul for WeightValue {
    type Output = WeightValue;
    fn mul(self, rhs: WeightValue) -> WeightValue {
        &self * &rhs
    }
}

impl fmt::Debug for WeightValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for WeightValue {
    /// Highest-degree terms first, e.g. `2*z0^2 + 11*z0 + 12`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { format!("z{v}") } else { format!("z{v}^{k}") })
                .collect();
            let neg = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mono.is_empty() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> WeightValue {
        WeightValue::var(0, 1)
    }
    fn c(v: i64) -> WeightValue {
        WeightValue::constant(int(v), 1)
    }

    #[test]
    fn rational_sum() {
        let a = parse_rational("1/2").unwrap();
        let b = parse_rational("1/3").unwrap();
        assert_eq!(format_rational(&(a + b)), "5/6");
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational(" 4/6 ").unwrap(), parse_rational("2/3").unwrap());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn linear_merge() {
        let p = &c(2) * &x();
        let q = &(&c(3) * &x()) + &c(1);
        assert_eq!(&p + &q, &(&c(5) * &x()) + &c(1));
        assert_eq!(&p + &WeightValue::zero(1), p);
    }

    #[test]
    fn products() {
        let a = &(&c(2) * &x()) + &c(3);
        let b = &x() + &c(4);
        let prod = &a * &b;
        assert_eq!(prod.to_string(), "2*z0^2 + 11*z0 + 12");
        assert_eq!(prod.coefficient_of(&[1]).unwrap(), int(11));
        let diff = &(&x() + &c(1)) * &(&x() + &c(-1));
        assert_eq!(diff.to_string(), "z0^2 - 1");
    }

    #[test]
    fn powers() {
        let half = WeightValue::constant(parse_rational("1/2").unwrap(), 0);
        assert_eq!(half.pow(3).as_rational().unwrap(), parse_rational("1/8").unwrap());
        assert_eq!(x().pow(0), WeightValue::one(1));
        assert_eq!((&x() + &c(1)).pow(2).to_string(), "z0^2 + 2*z0 + 1");
    }

    #[test]
    fn coefficients() {
        assert_eq!(WeightValue::constant(int(5), 0).coefficient_of(&[]).unwrap(), int(5));
        assert_eq!(x().pow(2).coefficient_of(&[0]).unwrap(), int(0));
        assert!(x().coefficient_of(&[0, 0]).is_err());
    }

    #[test]
    fn registry_mismatch() {
        let a = WeightValue::one(1);
        let b = WeightValue::one(2);
        assert!(matches!(a.try_add(&b), Err(ArithError::RegistryMismatch { .. })));
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn capped_product_drops_high_terms() {
        let p = &x() + &c(1);
        let q = p.mul_capped(&p, &[1]);
        assert_eq!(q.to_string(), "2*z0 + 1");
    }

    #[test]
    fn integer_helpers() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(2, 5), BigInt::zero());
        assert_eq!(factorial(5), BigInt::from(120));
    }
}
