//! Canonical surface syntax. `parse(print(e)) == e` for every expression.

use alloc::string::String;
use core::fmt::{self, Write};

use super::ast::{Binder, CmpOp, Expr};

pub fn print_formula(e: &Expr) -> String {
    let mut s = String::new();
    let _ = write!(s, "{e}");
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_term() {
            term(self, 0, f)
        } else {
            formula(self, 0, f)
        }
    }
}

// term levels: 0 sum, 1 product operand, 2 primary
fn term(e: &Expr, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(v) => write!(f, "{v}"),
        Expr::Ord => f.write_str("ord"),
        Expr::Num(y) => write!(f, "y{y}"),
        Expr::Add(a, b) => {
            if level > 0 {
                f.write_str("(")?;
            }
            term(a, 0, f)?;
            f.write_str(" + ")?;
            term(b, 1, f)?;
            if level > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Mul(a, b) => {
            if level > 1 {
                f.write_str("(")?;
            }
            term(a, 1, f)?;
            f.write_str("*")?;
            term(b, 2, f)?;
            if level > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Count(b) => {
            f.write_str("#")?;
            binders(b, f)?;
            f.write_str(".(")?;
            formula(&b.body, 0, f)?;
            f.write_str(")")
        }
        other => {
            f.write_str("(")?;
            formula(other, 0, f)?;
            f.write_str(")")
        }
    }
}

fn binders(b: &Binder, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("(")?;
    let mut first = true;
    for x in &b.vertex {
        if !first {
            f.write_str(", ")?;
        }
        first = false;
        write!(f, "x{x}")?;
    }
    for (y, t) in &b.numbers {
        if !first {
            f.write_str(", ")?;
        }
        first = false;
        write!(f, "y{y} < ")?;
        term(t, 0, f)?;
    }
    f.write_str(")")
}

// formula levels: 0 top or quantifier body, 1 disjunct, 2 conjunct, 3 negated
fn formula(e: &Expr, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::True => f.write_str("tt"),
        Expr::False => f.write_str("ff"),
        Expr::VertexEq(a, b) => write!(f, "x{a} = x{b}"),
        Expr::Edge(a, b) => write!(f, "E(x{a},x{b})"),
        Expr::Label(k, x) => write!(f, "P{k}(x{x})"),
        Expr::Cmp(op, a, b) => {
            term(a, 0, f)?;
            f.write_str(match op {
                CmpOp::Le => " <= ",
                CmpOp::Lt => " < ",
                CmpOp::Eq => " = ",
            })?;
            term(b, 0, f)
        }
        Expr::Not(a) => {
            f.write_str("!")?;
            formula(a, 3, f)
        }
        Expr::And(a, b) => {
            if level > 2 {
                f.write_str("(")?;
            }
            formula(a, 2, f)?;
            f.write_str(" & ")?;
            formula(b, 3, f)?;
            if level > 2 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Or(a, b) => {
            if level > 1 {
                f.write_str("(")?;
            }
            formula(a, 1, f)?;
            f.write_str(" | ")?;
            formula(b, 2, f)?;
            if level > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Exists(b) => {
            if level > 0 {
                f.write_str("(")?;
            }
            if b.vertex.len() == 1 && b.numbers.is_empty() {
                write!(f, "exists x{}", b.vertex[0])?;
            } else {
                f.write_str("exists ")?;
                binders(b, f)?;
            }
            f.write_str(" . ")?;
            formula(&b.body, 0, f)?;
            if level > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::CountQuant { threshold, var, body } => {
            if level > 0 {
                f.write_str("(")?;
            }
            write!(f, "exists^{{>={threshold}}} x{var} . ")?;
            formula(body, 0, f)?;
            if level > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Builtin { name, args } => {
            write!(f, "builtin {name}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                term(a, 0, f)?;
            }
            f.write_str(")")
        }
        Expr::ModRepr { index, bit, bound, modulus, result } => {
            write!(f, "modrepr(y{index}; ")?;
            formula(bit, 0, f)?;
            f.write_str("; ")?;
            term(bound, 0, f)?;
            f.write_str("; ")?;
            term(modulus, 0, f)?;
            f.write_str("; ")?;
            term(result, 0, f)?;
            f.write_str(")")
        }
        t => term(t, 0, f),
    }
}
