//! Sentence files.
//!
//! ```text
//! # comment
//! predicate E/2
//! order LEQ
//! card |E| = 6
//! weight H 2 1
//! forall x: ~E(x,x)
//! forall x: forall y: E(x,y) -> E(y,x)
//! forall x: exists[=2] y: E(x,y)
//! ```
//!
//! Every sentence line is a conjunct. A line continues onto the next while
//! parentheses are open or when it ends (or the next line starts) with a
//! binary operator.

use super::problem::{CardTarget, Cardinality, ProblemInput, Signature, WeightTable};
use super::{Atom, Cmp, Formula, Quantifier, Var};
use crate::arith::parse_rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: predicate {pred} has arity {found} here but {expected} elsewhere")]
    Arity { line: usize, col: usize, pred: String, expected: usize, found: usize },
    #[error("{line}:{col}: `{name}` is not a variable; only x and y may be used")]
    Variable { line: usize, col: usize, name: String },
    #[error("{line}:{col}: modulo quantifier needs 0 <= r < k, got r = {r}, k = {k}")]
    Modulo { line: usize, col: usize, r: u32, k: u32 },
    #[error("{line}:{col}: sentence has a free variable")]
    FreeVariable { line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Le,
    Ge,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, msg: msg.into() }
}

fn tokenize(text: &str, first_line: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (first_line, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        } else if c.is_whitespace() {
            (None, 1)
        } else if rest.starts_with("<->") {
            (Some(Tok::Iff), 3)
        } else if rest.starts_with("->") {
            (Some(Tok::Implies), 2)
        } else if rest.starts_with("<=") {
            (Some(Tok::Le), 2)
        } else if rest.starts_with(">=") {
            (Some(Tok::Ge), 2)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let v = s.parse().map_err(|_| syntax(line, col, format!("number {s} too large")))?;
            (Some(Tok::Num(v)), j - i)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (Some(Tok::Ident(chars[i..j].iter().collect())), j - i)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '~' | '!' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Or,
                '=' => Tok::Eq,
                _ => return Err(syntax(line, col, format!("unexpected character `{c}`"))),
            };
            (Some(t), 1)
        };
        if let Some(tok) = tok {
            out.push(Token { tok, line: start.0, col: start.1 });
        }
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

/// An atom occurrence, kept for arity checking.
struct Use {
    pred: String,
    arity: usize,
    line: usize,
    col: usize,
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    order: &'a mut Option<String>,
    uses: Vec<Use>,
}

const KEYWORDS: [&str; 5] = ["forall", "exists", "mod", "true", "false"];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            let (l, c) = self.here();
            Err(syntax(l, c, format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let right = self.implication()?;
            left = Formula::iff(left, right);
        }
        Ok(left)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let left = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let right = self.implication()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.conjunction()?];
        while *self.peek() == Tok::Or {
            self.bump();
            items.push(self.conjunction()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Formula::Or(items) })
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Formula::And(items) })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(s) if s == "forall" || s == "exists" => self.quantified(),
            _ => self.primary(),
        }
    }

    fn variable(&mut self) -> Result<Var, ParseError> {
        let (l, c) = self.here();
        match self.bump().tok {
            Tok::Ident(s) if s == "x" => Ok(Var::X),
            Tok::Ident(s) if s == "y" => Ok(Var::Y),
            Tok::Ident(s) => Err(ParseError::Variable { line: l, col: c, name: s }),
            t => Err(syntax(l, c, format!("expected a variable, found {}", describe(&t)))),
        }
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        let (l, c) = self.here();
        match self.bump().tok {
            Tok::Num(v) => Ok(v),
            t => Err(syntax(l, c, format!("expected a number, found {}", describe(&t)))),
        }
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let Tok::Ident(kw) = self.bump().tok else { unreachable!() };
        let mut q = if kw == "forall" { Quantifier::Forall } else { Quantifier::Exists };
        if kw == "exists" && *self.peek() == Tok::LBracket {
            let (l, c) = self.here();
            self.bump();
            let cmp = match self.bump().tok {
                Tok::Eq => Cmp::Eq,
                Tok::Le => Cmp::Le,
                Tok::Ge => Cmp::Ge,
                t => return Err(syntax(l, c + 1, format!("expected =, <= or >=, found {}", describe(&t)))),
            };
            let first = self.number()?;
            q = if *self.peek() == Tok::Ident("mod".into()) {
                self.bump();
                let k = self.number()?;
                if k == 0 || first >= k {
                    return Err(ParseError::Modulo { line: l, col: c, r: first, k });
                }
                Quantifier::Modulo { cmp, r: first, k }
            } else {
                Quantifier::Count { cmp, k: first }
            };
            self.expect(Tok::RBracket, "`]`")?;
        }
        let var = self.variable()?;
        self.expect(Tok::Colon, "`:`")?;
        let body = self.formula()?;
        Ok(Formula::quant(q, var, body))
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let (l, c) = self.here();
        match self.bump().tok {
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => Ok(Formula::True),
            Tok::Ident(s) if s == "false" => Ok(Formula::False),
            Tok::Ident(s) if (s == "x" || s == "y") && *self.peek() == Tok::Le => {
                self.bump();
                let a = if s == "x" { Var::X } else { Var::Y };
                let b = self.variable()?;
                let name = self.order.get_or_insert_with(|| "LEQ".to_string()).clone();
                self.uses.push(Use { pred: name.clone(), arity: 2, line: l, col: c });
                Ok(Formula::Atom(Atom { pred: name, args: vec![a, b] }))
            }
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                Err(syntax(l, c, format!("unexpected keyword `{s}`")))
            }
            Tok::Ident(s) if s == "x" || s == "y" => {
                Err(syntax(l, c, format!("variable `{s}` cannot stand alone")))
            }
            Tok::Ident(name) => {
                let mut args = Vec::new();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    if *self.peek() != Tok::RParen {
                        args.push(self.variable()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.variable()?);
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                }
                if args.len() > 2 {
                    return Err(syntax(l, c, format!("{name} has arity {}; at most 2 is supported", args.len())));
                }
                self.uses.push(Use { pred: name.clone(), arity: args.len(), line: l, col: c });
                Ok(Formula::Atom(Atom { pred: name, args }))
            }
            t => Err(syntax(l, c, format!("expected a formula, found {}", describe(&t)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(v) => format!("`{v}`"),
        Tok::End => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn parse_group(
    text: &str,
    first_line: usize,
    order: &mut Option<String>,
    uses: &mut Vec<Use>,
) -> Result<Formula, ParseError> {
    let toks = tokenize(text, first_line)?;
    let mut p = Parser { toks, pos: 0, order, uses: Vec::new() };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        let (l, c) = p.here();
        return Err(syntax(l, c, format!("unexpected {}", describe(p.peek()))));
    }
    uses.append(&mut p.uses);
    Ok(f)
}

/// Parses a single formula (free variables allowed). Infix `<=` is read as
/// the predicate `LEQ`.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut order = None;
    parse_group(text, 1, &mut order, &mut Vec::new())
}

fn ends_open(line: &str) -> bool {
    let t = line.trim_end();
    ["&", "|", "->", "<->", ":", "~", "(", ","].iter().any(|s| t.ends_with(s))
}

fn starts_binary(line: &str) -> bool {
    let t = line.trim_start();
    ["&", "|", "->", "<->"].iter().any(|s| t.starts_with(s))
}

fn depth(line: &str) -> i64 {
    line.chars().map(|c| match c {
        '(' => 1,
        ')' => -1,
        _ => 0,
    }).sum()
}

fn strip_comment(line: &str) -> &str {
    let cut = [line.find('#'), line.find("//")].into_iter().flatten().min();
    match cut {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_card_target(text: &str, line: usize) -> Result<CardTarget, ParseError> {
    let bad = || syntax(line, 1, format!("bad cardinality target `{text}`"));
    let mut target = CardTarget { per_n: 0, offset: 0 };
    for term in text.split('+') {
        let t: String = term.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(coef) = t.strip_suffix('n') {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let a: u32 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
            target.per_n += a;
        } else {
            target.offset += t.parse::<u32>().map_err(|_| bad())?;
        }
    }
    Ok(target)
}

/// Parses a sentence file.
pub fn parse_problem(text: &str) -> Result<ProblemInput, ParseError> {
    let mut declared: Vec<Use> = Vec::new();
    let mut order: Option<String> = None;
    let mut cards: Vec<(String, CardTarget, usize)> = Vec::new();
    let mut weights: Vec<(String, String, String, usize)> = Vec::new();
    let mut groups: Vec<(usize, String)> = Vec::new();
    let mut open: Option<(usize, String)> = None;

    let lines: Vec<&str> = text.lines().map(strip_comment).collect();
    for (idx, raw) in lines.iter().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if let Some((start, mut acc)) = open.take() {
            acc.push('\n');
            acc.push_str(raw);
            open = Some((start, acc));
        } else if line.is_empty() {
            continue;
        } else {
            let word = line.split_whitespace().next().unwrap();
            let rest = line[word.len()..].trim();
            match word {
                "predicate" => {
                    let (name, ar) = rest
                        .split_once('/')
                        .ok_or_else(|| syntax(lineno, 1, "expected `predicate Name/arity`"))?;
                    let arity: usize = ar.trim().parse().map_err(|_| syntax(lineno, 1, "bad arity"))?;
                    if arity > 2 {
                        return Err(syntax(lineno, 1, format!("arity {arity} is not supported")));
                    }
                    declared.push(Use { pred: name.trim().to_string(), arity, line: lineno, col: 1 });
                    continue;
                }
                "order" => {
                    let name = rest.to_string();
                    if name.is_empty() {
                        return Err(syntax(lineno, 1, "expected `order Name`"));
                    }
                    declared.push(Use { pred: name.clone(), arity: 2, line: lineno, col: 1 });
                    order = Some(name);
                    continue;
                }
                "card" => {
                    let (lhs, rhs) = rest
                        .split_once('=')
                        .ok_or_else(|| syntax(lineno, 1, "expected `card |P| = d`"))?;
                    let name = lhs.trim().trim_matches('|').trim().to_string();
                    cards.push((name, parse_card_target(rhs, lineno)?, lineno));
                    continue;
                }
                "weight" => {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(syntax(lineno, 1, "expected `weight P w wbar`"));
                    }
                    weights.push((parts[0].into(), parts[1].into(), parts[2].into(), lineno));
                    continue;
                }
                _ => open = Some((lineno, raw.to_string())),
            }
        }
        // decide whether the open group continues
        if let Some((start, acc)) = &open {
            let next_binary = lines.get(idx + 1).is_some_and(|l| starts_binary(l));
            let unbalanced = depth(acc) > 0;
            if !(unbalanced || ends_open(acc) || next_binary) {
                groups.push((*start, acc.clone()));
                open = None;
            }
        }
    }
    if let Some(g) = open {
        groups.push(g);
    }

    let mut uses = Vec::new();
    let mut conjuncts = Vec::new();
    for (start, text) in &groups {
        let f = parse_group(text, *start, &mut order, &mut uses)?;
        if f.free_vars() != 0 {
            return Err(ParseError::FreeVariable { line: *start, col: 1 });
        }
        conjuncts.push(f);
    }

    let mut signature = Signature::new();
    let mut origin: std::collections::BTreeMap<String, (usize, usize)> = Default::default();
    for u in declared.iter().chain(uses.iter()) {
        match signature.get(&u.pred) {
            Some(&a) if a != u.arity => {
                return Err(ParseError::Arity {
                    line: u.line,
                    col: u.col,
                    pred: u.pred.clone(),
                    expected: a,
                    found: u.arity,
                })
            }
            Some(_) => {}
            None => {
                signature.insert(u.pred.clone(), u.arity);
                origin.insert(u.pred.clone(), (u.line, u.col));
            }
        }
    }

    let mut table = WeightTable::new();
    for (p, w, wb, line) in weights {
        if !signature.contains_key(&p) {
            return Err(syntax(line, 1, format!("weight for unknown predicate {p}")));
        }
        let w = parse_rational(&w).map_err(|e| syntax(line, 1, e.to_string()))?;
        let wb = parse_rational(&wb).map_err(|e| syntax(line, 1, e.to_string()))?;
        table.set(p, w, wb);
    }
    let mut cardinality = Vec::new();
    for (p, target, line) in cards {
        if !signature.contains_key(&p) {
            return Err(syntax(line, 1, format!("cardinality for unknown predicate {p}")));
        }
        cardinality.push(Cardinality { pred: p, target });
    }

    Ok(ProblemInput {
        sentence: Formula::and(conjuncts),
        signature,
        cardinality,
        order,
        weights: table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negated_self_loop() {
        let f = parse_formula("forall x: ~E(x,x)").unwrap();
        let want = Formula::forall(Var::X, Formula::not(Formula::atom("E", &[Var::X, Var::X])));
        assert_eq!(f, want);
    }

    #[test]
    fn counting_quantifiers() {
        let f = parse_formula("forall x: exists[=2] y: E(x,y)").unwrap();
        let Formula::Quant { body, .. } = f else { panic!() };
        let Formula::Quant { q, var, .. } = *body else { panic!() };
        assert_eq!(q, Quantifier::Count { cmp: Cmp::Eq, k: 2 });
        assert_eq!(var, Var::Y);
        let g = parse_formula("forall x: exists[=1 mod 2] y: E(x,y)").unwrap();
        let Formula::Quant { body, .. } = g else { panic!() };
        let Formula::Quant { q, .. } = *body else { panic!() };
        assert_eq!(q, Quantifier::Modulo { cmp: Cmp::Eq, r: 1, k: 2 });
    }

    #[test]
    fn precedence() {
        let f = parse_formula("A | B & C -> D -> E <-> F").unwrap();
        let want = Formula::iff(
            Formula::implies(
                Formula::Or(vec![
                    Formula::atom("A", &[]),
                    Formula::And(vec![Formula::atom("B", &[]), Formula::atom("C", &[])]),
                ]),
                Formula::implies(Formula::atom("D", &[]), Formula::atom("E", &[])),
            ),
            Formula::atom("F", &[]),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_formula("forall x: E(x,z)") {
            Err(ParseError::Variable { line: 1, col: 15, name }) => assert_eq!(name, "z"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_formula("exists[=3 mod 2] y: P(y)"), Err(ParseError::Modulo { .. })));
        assert!(matches!(parse_formula("P(x) &"), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse_problem("forall x: P(x)\nforall x: forall y: P(x,y)"),
            Err(ParseError::Arity { line: 2, .. })
        ));
        assert!(matches!(parse_problem("exists y: E(x,y)"), Err(ParseError::FreeVariable { .. })));
        assert!(matches!(parse_formula("forall z: P(z)"), Err(ParseError::Variable { .. })));
    }

    #[test]
    fn problem_file() {
        let text = "# coins\npredicate T/1\nweight H 2 1\ncard |H| = 2\nforall x: (H(x) | T(x)) &\n   (~H(x) | ~T(x))\n";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.signature.len(), 2);
        assert_eq!(p.weights.get("H").0, crate::arith::int(2));
        assert_eq!(p.cardinality[0].target, CardTarget::fixed(2));
        assert_eq!(p.sentence.conjuncts().len(), 1);
    }

    #[test]
    fn order_sugar() {
        let p = parse_problem("order LE\nforall x: forall y: R(x,y) -> y <= x").unwrap();
        assert_eq!(p.order.as_deref(), Some("LE"));
        assert!(p.sentence.mentions("LE"));
        let q = parse_problem("forall x: x <= x").unwrap();
        assert_eq!(q.order.as_deref(), Some("LEQ"));
    }

    #[test]
    fn card_targets() {
        assert_eq!(parse_card_target("n", 1).unwrap(), CardTarget { per_n: 1, offset: 0 });
        assert_eq!(parse_card_target(" 4*n + 1", 1).unwrap(), CardTarget { per_n: 4, offset: 1 });
        assert_eq!(parse_card_target("2n", 1).unwrap(), CardTarget { per_n: 2, offset: 0 });
    }
}
