use super::{Formula, Quantifier};
use std::fmt;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Quant { .. } => 0,
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(_) => 3,
        Formula::And(_) => 4,
        Formula::Not(_) => 5,
        Formula::True | Formula::False | Formula::Atom(_) => 6,
    }
}

fn write_at(f: &Formula, ctx: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = prec(f) < ctx;
    if wrap {
        write!(out, "(")?;
    }
    match f {
        Formula::True => write!(out, "true")?,
        Formula::False => write!(out, "false")?,
        Formula::Atom(a) => {
            write!(out, "{}", a.pred)?;
            if !a.args.is_empty() {
                let args: Vec<&str> = a.args.iter().map(|v| v.name()).collect();
                write!(out, "({})", args.join(","))?;
            }
        }
        Formula::Not(g) => {
            write!(out, "~")?;
            write_at(g, 5, out)?;
        }
        Formula::And(v) | Formula::Or(v) => {
            let (sep, child) = if matches!(f, Formula::And(_)) { (" & ", 5) } else { (" | ", 4) };
            for (i, g) in v.iter().enumerate() {
                if i > 0 {
                    write!(out, "{sep}")?;
                }
                write_at(g, child, out)?;
            }
        }
        Formula::Implies(a, b) => {
            write_at(a, 3, out)?;
            write!(out, " -> ")?;
            write_at(b, 2, out)?;
        }
        Formula::Iff(a, b) => {
            write_at(a, 1, out)?;
            write!(out, " <-> ")?;
            write_at(b, 2, out)?;
        }
        Formula::Quant { q, var, body } => {
            match q {
                Quantifier::Forall => write!(out, "forall")?,
                Quantifier::Exists => write!(out, "exists")?,
                Quantifier::Count { cmp, k } => write!(out, "exists[{}{}]", cmp.symbol(), k)?,
                Quantifier::Modulo { cmp, r, k } => {
                    write!(out, "exists[{}{} mod {}]", cmp.symbol(), r, k)?
                }
            }
            write!(out, " {}: ", var.name())?;
            write_at(body, 0, out)?;
        }
    }
    if wrap {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}
