//! Surface syntax reader.
//!
//! ```text
//! term    := sum
//! sum     := prod ('+' prod)*
//! prod    := primary ('*' primary)*
//! primary := <nat> | ord | ord^<nat> | y<k> | #(binders).unary | #x<k>.unary | (term)
//! formula := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | quant | atom
//! quant   := exists^{>=n} x<k> . formula | exists (binders) . formula | exists x<k> . formula
//! atom    := tt | ff | E(x,x) | P<k>(x) | x=x | term (<=|<|=|>=|>) term
//!          | builtin name(term, ...) | modrepr(y<k>; formula; term; term; term) | (formula)
//! ```
//!
//! Quantifier bodies extend as far right as possible. `y` alone is `y0`.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use super::ast::{Binder, CmpOp, Expr, NVar, VVar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: expected {expected}")]
    Syntax { offset: usize, line: usize, column: usize, expected: String },
    #[error("unbound {0}")]
    Unbound(String),
    #[error("vertex variable x{0} is not allowed in the two-variable fragment")]
    TooManyVertexVariables(VVar),
    #[error("self-loop atom E(x{0},x{0}) is not allowed in the two-variable fragment")]
    SelfLoopAtom(VVar),
    #[error("number literal `{0}` does not fit in 64 bits")]
    NumberTooLarge(String),
}

/// Restrictions checked after parsing.
#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Allow only `x1`, `x2` and reject `E(x,x)`.
    pub two_variable: bool,
    /// When set, free vertex variables must come from this set.
    pub free_vertex: Option<BTreeSet<VVar>>,
    /// When set, free number variables must come from this set.
    pub free_number: Option<BTreeSet<NVar>>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { two_variable: true, free_vertex: None, free_number: None }
    }
}

impl ParseOptions {
    pub fn general() -> Self {
        ParseOptions { two_variable: false, free_vertex: None, free_number: None }
    }
}

pub fn parse_formula(text: &str) -> Result<Expr, ParseError> {
    parse_formula_with(text, &ParseOptions::default())
}

pub fn parse_formula_with(text: &str, opts: &ParseOptions) -> Result<Expr, ParseError> {
    let e = parse_with(text, Goal::Formula)?;
    validate(&e, opts)?;
    Ok(e)
}

pub fn parse_term(text: &str) -> Result<Expr, ParseError> {
    let e = parse_with(text, Goal::Term)?;
    validate(&e, &ParseOptions::default())?;
    Ok(e)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    Term,
    Formula,
}

fn parse_with(text: &str, goal: Goal) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, furthest: 0, expected: BTreeSet::new(), term_memo: HashMap::new(), formula_memo: HashMap::new() };
    let res = match goal {
        Goal::Formula => p.formula(0),
        Goal::Term => p.term(0),
    };
    match res {
        Some((e, end)) if end == p.toks.len() - 1 => Ok(e),
        Some((_, end)) => {
            p.fail(end, "end of input");
            Err(p.error(text))
        }
        None => Err(p.error(text)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Sym(&'static str),
    End,
}

const SYMBOLS: [&str; 20] = ["<=", ">=", "(", ")", ",", ".", ";", "#", "+", "*", "^", "{", "}", "!", "&", "|", "<", ">", "=", "~"];

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let s = &text[start..i];
            let v = s.parse::<u64>().map_err(|_| ParseError::NumberTooLarge(s.to_string()))?;
            out.push((Tok::Nat(v), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        for s in SYMBOLS {
            if text[i..].starts_with(s) {
                out.push((Tok::Sym(s), i));
                i += s.len();
                continue 'outer;
            }
        }
        let (line, column) = line_col(text, i);
        let ch = text[i..].chars().next().unwrap_or('?');
        return Err(ParseError::Syntax { offset: i, line, column, expected: format!("a token, found `{ch}`") });
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

enum Ident {
    Vertex(VVar),
    Number(NVar),
    Label(u32),
    Other,
}

fn classify_ident(s: &str) -> Ident {
    let (head, tail) = s.split_at(1);
    if s == "y" {
        return Ident::Number(0);
    }
    if !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) {
        if let Ok(k) = tail.parse::<u32>() {
            return match head {
                "x" => Ident::Vertex(k),
                "y" => Ident::Number(k),
                "P" if k >= 1 => Ident::Label(k),
                _ => Ident::Other,
            };
        }
    }
    Ident::Other
}

type PResult = Option<(Expr, usize)>;

struct Parser {
    toks: Vec<(Tok, usize)>,
    furthest: usize,
    expected: BTreeSet<&'static str>,
    term_memo: HashMap<usize, PResult>,
    formula_memo: HashMap<usize, PResult>,
}

impl Parser {
    fn tok(&self, pos: usize) -> &Tok {
        &self.toks[pos.min(self.toks.len() - 1)].0
    }

    fn fail(&mut self, pos: usize, what: &'static str) {
        if pos > self.furthest {
            self.furthest = pos;
            self.expected.clear();
        }
        if pos == self.furthest {
            self.expected.insert(what);
        }
    }

    fn error(&self, text: &str) -> ParseError {
        let offset = self.toks[self.furthest.min(self.toks.len() - 1)].1;
        let (line, column) = line_col(text, offset);
        let expected = self.expected.iter().copied().collect::<Vec<_>>().join(" or ");
        ParseError::Syntax { offset, line, column, expected }
    }

    fn sym(&mut self, pos: usize, s: &'static str) -> Option<usize> {
        if *self.tok(pos) == Tok::Sym(s) {
            Some(pos + 1)
        } else {
            self.fail(pos, s);
            None
        }
    }

    fn keyword(&mut self, pos: usize, kw: &'static str) -> Option<usize> {
        match self.tok(pos) {
            Tok::Ident(s) if s == kw => Some(pos + 1),
            _ => {
                self.fail(pos, kw);
                None
            }
        }
    }

    fn nat(&mut self, pos: usize) -> Option<(u64, usize)> {
        match self.tok(pos) {
            Tok::Nat(v) => Some((*v, pos + 1)),
            _ => {
                self.fail(pos, "a natural number");
                None
            }
        }
    }

    fn vertex_var(&mut self, pos: usize) -> Option<(VVar, usize)> {
        if let Tok::Ident(s) = self.tok(pos) {
            if let Ident::Vertex(k) = classify_ident(s) {
                return Some((k, pos + 1));
            }
        }
        self.fail(pos, "a vertex variable");
        None
    }

    fn number_var(&mut self, pos: usize) -> Option<(NVar, usize)> {
        if let Tok::Ident(s) = self.tok(pos) {
            if let Ident::Number(k) = classify_ident(s) {
                return Some((k, pos + 1));
            }
        }
        self.fail(pos, "a number variable");
        None
    }

    fn name(&mut self, pos: usize) -> Option<(String, usize)> {
        match self.tok(pos) {
            Tok::Ident(s) => Some((s.clone(), pos + 1)),
            _ => {
                self.fail(pos, "a name");
                None
            }
        }
    }

    // ---- terms ----

    fn term(&mut self, pos: usize) -> PResult {
        if let Some(r) = self.term_memo.get(&pos) {
            return r.clone();
        }
        let r = self.sum(pos);
        self.term_memo.insert(pos, r.clone());
        r
    }

    fn sum(&mut self, pos: usize) -> PResult {
        let (mut acc, mut pos) = self.prod(pos)?;
        while let Some(p) = self.sym(pos, "+") {
            let (rhs, p) = self.prod(p)?;
            acc = Expr::add(acc, rhs);
            pos = p;
        }
        Some((acc, pos))
    }

    fn prod(&mut self, pos: usize) -> PResult {
        let (mut acc, mut pos) = self.primary(pos)?;
        while let Some(p) = self.sym(pos, "*") {
            let (rhs, p) = self.primary(p)?;
            acc = Expr::mul(acc, rhs);
            pos = p;
        }
        Some((acc, pos))
    }

    fn primary(&mut self, pos: usize) -> PResult {
        match self.tok(pos).clone() {
            Tok::Nat(v) => Some((Expr::Const(v), pos + 1)),
            Tok::Ident(s) if s == "ord" => {
                if let Some(p) = self.sym(pos + 1, "^") {
                    let (d, p) = self.nat(p)?;
                    let d = u32::try_from(d).ok()?;
                    return Some((Expr::ord_pow(d), p));
                }
                Some((Expr::Ord, pos + 1))
            }
            Tok::Ident(s) => match classify_ident(&s) {
                Ident::Number(k) => Some((Expr::Num(k), pos + 1)),
                _ => {
                    self.fail(pos, "a term");
                    None
                }
            },
            Tok::Sym("#") => {
                let (vertex, numbers, p) = if let Some((x, p)) = self.vertex_var(pos + 1) {
                    (alloc::vec![x], Vec::new(), p)
                } else {
                    let p = self.sym(pos + 1, "(")?;
                    let (vertex, numbers, p) = self.binders(p)?;
                    (vertex, numbers, self.sym(p, ")")?)
                };
                let p = self.sym(p, ".")?;
                let (body, p) = self.unary(p)?;
                Some((Expr::Count(Binder { vertex, numbers, body: Box::new(body) }), p))
            }
            Tok::Sym("(") => {
                let (t, p) = self.term(pos + 1)?;
                let p = self.sym(p, ")")?;
                Some((t, p))
            }
            _ => {
                self.fail(pos, "a term");
                None
            }
        }
    }

    fn binders(&mut self, mut pos: usize) -> Option<(Vec<VVar>, Vec<(NVar, Expr)>, usize)> {
        let mut vertex = Vec::new();
        let mut numbers = Vec::new();
        loop {
            if let Some((x, p)) = self.vertex_var(pos) {
                vertex.push(x);
                pos = p;
            } else {
                let (y, p) = self.number_var(pos)?;
                let p = self.sym(p, "<")?;
                let (t, p) = self.term(p)?;
                numbers.push((y, t));
                pos = p;
            }
            match self.sym(pos, ",") {
                Some(p) => pos = p,
                None => return Some((vertex, numbers, pos)),
            }
        }
    }

    // ---- formulas ----

    fn formula(&mut self, pos: usize) -> PResult {
        if let Some(r) = self.formula_memo.get(&pos) {
            return r.clone();
        }
        let r = self.disjunction(pos);
        self.formula_memo.insert(pos, r.clone());
        r
    }

    fn disjunction(&mut self, pos: usize) -> PResult {
        let (mut acc, mut pos) = self.conjunction(pos)?;
        while let Some(p) = self.sym(pos, "|") {
            let (rhs, p) = self.conjunction(p)?;
            acc = Expr::or(acc, rhs);
            pos = p;
        }
        Some((acc, pos))
    }

    fn conjunction(&mut self, pos: usize) -> PResult {
        let (mut acc, mut pos) = self.unary(pos)?;
        while let Some(p) = self.sym(pos, "&") {
            let (rhs, p) = self.unary(p)?;
            acc = Expr::and(acc, rhs);
            pos = p;
        }
        Some((acc, pos))
    }

    fn unary(&mut self, pos: usize) -> PResult {
        if let Some(p) = self.sym(pos, "!") {
            let (f, p) = self.unary(p)?;
            return Some((Expr::not(f), p));
        }
        if let Some(p) = self.keyword(pos, "exists") {
            return self.quantifier(p);
        }
        self.atom(pos)
    }

    fn quantifier(&mut self, pos: usize) -> PResult {
        if let Some(p) = self.sym(pos, "^") {
            let p = self.sym(p, "{")?;
            let p = self.sym(p, ">=")?;
            let (threshold, p) = self.nat(p)?;
            let p = self.sym(p, "}")?;
            let (var, p) = self.vertex_var(p)?;
            let p = self.sym(p, ".")?;
            let (body, p) = self.formula(p)?;
            return Some((Expr::CountQuant { threshold, var, body: Box::new(body) }, p));
        }
        let (vertex, numbers, p) = if let Some((x, p)) = self.vertex_var(pos) {
            (alloc::vec![x], Vec::new(), p)
        } else {
            let p = self.sym(pos, "(")?;
            let (v, n, p) = self.binders(p)?;
            (v, n, self.sym(p, ")")?)
        };
        let p = self.sym(p, ".")?;
        let (body, p) = self.formula(p)?;
        Some((Expr::Exists(Binder { vertex, numbers, body: Box::new(body) }), p))
    }

    fn atom(&mut self, pos: usize) -> PResult {
        match self.tok(pos).clone() {
            Tok::Ident(s) if s == "tt" => return Some((Expr::True, pos + 1)),
            Tok::Ident(s) if s == "ff" => return Some((Expr::False, pos + 1)),
            Tok::Ident(s) if s == "E" => {
                let p = self.sym(pos + 1, "(")?;
                let (a, p) = self.vertex_var(p)?;
                let p = self.sym(p, ",")?;
                let (b, p) = self.vertex_var(p)?;
                let p = self.sym(p, ")")?;
                return Some((Expr::Edge(a, b), p));
            }
            Tok::Ident(s) if s == "builtin" => {
                let (name, p) = self.name(pos + 1)?;
                let p = self.sym(p, "(")?;
                let mut args = Vec::new();
                let mut p = p;
                if let Some(q) = self.sym(p, ")") {
                    return Some((Expr::Builtin { name, args }, q));
                }
                loop {
                    let (t, q) = self.term(p)?;
                    args.push(t);
                    if let Some(q) = self.sym(q, ",") {
                        p = q;
                        continue;
                    }
                    let q = self.sym(q, ")")?;
                    return Some((Expr::Builtin { name, args }, q));
                }
            }
            Tok::Ident(s) if s == "modrepr" => {
                let p = self.sym(pos + 1, "(")?;
                let (index, p) = self.number_var(p)?;
                let p = self.sym(p, ";")?;
                let (bit, p) = self.formula(p)?;
                let p = self.sym(p, ";")?;
                let (bound, p) = self.term(p)?;
                let p = self.sym(p, ";")?;
                let (modulus, p) = self.term(p)?;
                let p = self.sym(p, ";")?;
                let (result, p) = self.term(p)?;
                let p = self.sym(p, ")")?;
                return Some((
                    Expr::ModRepr {
                        index,
                        bit: Box::new(bit),
                        bound: Box::new(bound),
                        modulus: Box::new(modulus),
                        result: Box::new(result),
                    },
                    p,
                ));
            }
            Tok::Ident(s) => match classify_ident(&s) {
                Ident::Label(k) => {
                    let p = self.sym(pos + 1, "(")?;
                    let (x, p) = self.vertex_var(p)?;
                    let p = self.sym(p, ")")?;
                    return Some((Expr::Label(k, x), p));
                }
                Ident::Vertex(a) => {
                    let p = self.sym(pos + 1, "=")?;
                    let (b, p) = self.vertex_var(p)?;
                    return Some((Expr::VertexEq(a, b), p));
                }
                _ => {}
            },
            _ => {}
        }
        if let Some(r) = self.comparison(pos) {
            return Some(r);
        }
        let p = self.sym(pos, "(")?;
        let (f, p) = self.formula(p)?;
        let p = self.sym(p, ")")?;
        Some((f, p))
    }

    fn comparison(&mut self, pos: usize) -> PResult {
        let (a, p) = self.term(pos)?;
        let (op, swap, p) = match self.tok(p) {
            Tok::Sym("<=") => (CmpOp::Le, false, p + 1),
            Tok::Sym("<") => (CmpOp::Lt, false, p + 1),
            Tok::Sym("=") => (CmpOp::Eq, false, p + 1),
            Tok::Sym(">=") => (CmpOp::Le, true, p + 1),
            Tok::Sym(">") => (CmpOp::Lt, true, p + 1),
            _ => {
                self.fail(p, "a comparison");
                return None;
            }
        };
        let (b, p) = self.term(p)?;
        let e = if swap { Expr::cmp(op, b, a) } else { Expr::cmp(op, a, b) };
        Some((e, p))
    }
}

fn validate(e: &Expr, opts: &ParseOptions) -> Result<(), ParseError> {
    if opts.two_variable {
        let mut err = None;
        e.walk(&mut |n| {
            if err.is_some() {
                return;
            }
            if let Expr::Edge(a, b) = n {
                if a == b {
                    err = Some(ParseError::SelfLoopAtom(*a));
                }
            }
        });
        if let Some(err) = err {
            return Err(err);
        }
        if let Some(&x) = e.all_vertex_vars().iter().find(|&&x| x != 1 && x != 2) {
            return Err(ParseError::TooManyVertexVariables(x));
        }
    }
    if let Some(allowed) = &opts.free_vertex {
        if let Some(x) = e.free_vertex_vars().iter().find(|x| !allowed.contains(x)) {
            return Err(ParseError::Unbound(format!("vertex variable x{x}")));
        }
    }
    if let Some(allowed) = &opts.free_number {
        if let Some(y) = e.free_number_vars().iter().find(|y| !allowed.contains(y)) {
            return Err(ParseError::Unbound(format!("number variable y{y}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn degree_term() {
        let e = parse_term("# (x2) . (E(x1,x2) & x2 = x2)").unwrap();
        assert_eq!(e, Expr::degree(1, 2));
    }

    #[test]
    fn even_degree() {
        let e = parse_formula("exists (y < ord) . (2*y = #(x2).(E(x1,x2) & x2=x2))").unwrap();
        let expected = Expr::exists(
            vec![],
            vec![(0, Expr::Ord)],
            Expr::eq(Expr::mul(Expr::Const(2), Expr::Num(0)), Expr::degree(1, 2)),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn self_loop_rejected_in_two_variable_mode() {
        assert_eq!(parse_formula("E(x1,x1)"), Err(ParseError::SelfLoopAtom(1)));
        assert!(parse_formula_with("E(x1,x1)", &ParseOptions::general()).is_ok());
        assert_eq!(parse_formula("E(x1,x3)"), Err(ParseError::TooManyVertexVariables(3)));
    }

    #[test]
    fn precedence() {
        let e = parse_formula("!P1(x1) & P2(x1) | tt").unwrap();
        assert_eq!(
            e,
            Expr::or(Expr::and(Expr::not(Expr::Label(1, 1)), Expr::Label(2, 1)), Expr::True)
        );
        // counting binds tighter than the comparison
        let e = parse_formula("#x2.E(x1,x2) < 3").unwrap();
        assert_eq!(e, Expr::lt(Expr::count(vec![2], vec![], Expr::Edge(1, 2)), Expr::Const(3)));
        // quantifier bodies extend to the right
        let e = parse_formula("P1(x1) & exists x2 . E(x1,x2) | P1(x2)").unwrap();
        assert_eq!(
            e,
            Expr::and(
                Expr::Label(1, 1),
                Expr::exists(vec![2], vec![], Expr::or(Expr::Edge(1, 2), Expr::Label(1, 2)))
            )
        );
    }

    #[test]
    fn parenthesised_terms_and_formulas() {
        let e = parse_formula("(y1 + 1) * 2 <= ord").unwrap();
        assert_eq!(
            e,
            Expr::le(Expr::mul(Expr::add(Expr::Num(1), Expr::Const(1)), Expr::Const(2)), Expr::Ord)
        );
        let e = parse_formula("((((tt))))").unwrap();
        assert_eq!(e, Expr::True);
    }

    #[test]
    fn counting_quantifier_and_builtins() {
        let e = parse_formula("exists^{>=2} x2 . E(x1,x2) & builtin prime(y3)").unwrap();
        match e {
            Expr::CountQuant { threshold: 2, var: 2, body } => {
                assert_eq!(*body, Expr::and(Expr::Edge(1, 2), Expr::Builtin { name: "prime".into(), args: vec![Expr::Num(3)] }));
            }
            other => panic!("unexpected {other:?}"),
        }
        let m = parse_formula("modrepr(y5; y5 < 3; ord; 5; y1)").unwrap();
        assert!(matches!(m, Expr::ModRepr { index: 5, .. }));
    }

    #[test]
    fn errors_carry_locations() {
        match parse_formula("E(x1,x2) &\n  & tt") {
            Err(ParseError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        let opts = ParseOptions { free_vertex: Some([1].into_iter().collect()), ..ParseOptions::default() };
        assert_eq!(parse_formula_with("E(x1,x2)", &opts), Err(ParseError::Unbound("vertex variable x2".into())));
    }

    #[test]
    fn deep_nesting_stays_fast() {
        let mut s = String::new();
        for _ in 0..200 {
            s.push('(');
        }
        s.push_str("y1 < ord");
        for _ in 0..200 {
            s.push(')');
        }
        assert!(parse_formula(&s).is_ok());
    }
}
