//! Guarded to modal translation for the two-variable counting logic.
//!
//! Under a guard `E(x,x')` the body is a Boolean combination of the atoms
//! `x = x'`, `E(x,x')` (fixed by the guard) and formulas with one free
//! variable. The body is brought into a disjunction of pairwise exclusive
//! conjunctions `chi_i(x) & chi_i'(x')`, and the threshold is split over all
//! compositions `n = n_1 + ... + n_k`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::TranslateError;
use crate::logic::ast::{Expr, VVar};
use crate::logic::fragment::{classify_fragment, split_guard};

/// Propositional skeleton over leaf indices.
#[derive(Debug, Clone)]
enum Prop {
    Const(bool),
    Leaf(usize),
    Not(Box<Prop>),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
}

type Literal = (usize, bool);
type Conjunction = Vec<Literal>;

/// Translates a GC formula into an equivalent MC formula.
pub fn gc_to_mc(phi: &Expr) -> Result<Expr, TranslateError> {
    if !classify_fragment(phi).is_gc {
        return Err(TranslateError::NotInFragment("GC"));
    }
    Ok(translate(phi))
}

fn translate(e: &Expr) -> Expr {
    match e {
        Expr::CountQuant { threshold, var, body } => quantifier(*threshold, *var, body),
        Expr::Exists(b) if b.vertex.len() == 1 && b.numbers.is_empty() => quantifier(1, b.vertex[0], &b.body),
        _ => e.map_children(&mut translate),
    }
}

fn quantifier(n: u64, bound: VVar, body: &Expr) -> Expr {
    let (x, psi) = split_guard(bound, body).expect("guarded input");
    let guard = (*body.conjuncts()[0]).clone();
    let psi = translate(&psi);
    if !psi.free_vertex_vars().contains(&x) {
        return at_least(n, bound, Expr::and(guard, psi));
    }
    let mut leaves = Vec::new();
    let skeleton = abstract_body(&psi, x, bound, &mut leaves);
    let dnf = disjoint(dnf(&skeleton));

    // split each conjunction into the part about x and the part about x'
    let pieces: Vec<(Expr, Expr)> = dnf
        .iter()
        .map(|conj| {
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &(leaf, pos) in conj {
                let lit = if pos { leaves[leaf].clone() } else { Expr::not(leaves[leaf].clone()) };
                if leaves[leaf].free_vertex_vars().contains(&bound) {
                    right.push(lit);
                } else {
                    left.push(lit);
                }
            }
            (Expr::conj(left), Expr::conj(right))
        })
        .collect();

    let mut disjuncts = Vec::new();
    for parts in compositions(n, pieces.len()) {
        let conj: Vec<Expr> = parts
            .iter()
            .zip(&pieces)
            .filter(|(&ni, _)| ni > 0)
            .map(|(&ni, (chi, chi2))| Expr::and(chi.clone(), at_least(ni, bound, Expr::and(guard.clone(), chi2.clone()))))
            .collect();
        disjuncts.push(Expr::conj(conj));
    }
    Expr::disj(disjuncts)
}

fn at_least(n: u64, var: VVar, body: Expr) -> Expr {
    if n == 1 {
        Expr::exists(vec![var], Vec::new(), body)
    } else {
        Expr::CountQuant { threshold: n, var, body: Box::new(body) }
    }
}

/// All `(n_1, ..., n_k)` with entries in `0..=n` summing to `n`.
fn compositions(n: u64, k: usize) -> Vec<Vec<u64>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Replaces maximal one-variable subformulas by leaves and evaluates the
/// relational atoms fixed by the guard.
fn abstract_body(e: &Expr, x: VVar, x2: VVar, leaves: &mut Vec<Expr>) -> Prop {
    let fv = e.free_vertex_vars();
    if !(fv.contains(&x) && fv.contains(&x2)) {
        let idx = leaves.iter().position(|l| l == e).unwrap_or_else(|| {
            leaves.push(e.clone());
            leaves.len() - 1
        });
        return Prop::Leaf(idx);
    }
    match e {
        Expr::Edge(..) => Prop::Const(true),
        Expr::VertexEq(..) => Prop::Const(false),
        Expr::Not(a) => Prop::Not(Box::new(abstract_body(a, x, x2, leaves))),
        Expr::And(a, b) => {
            Prop::And(Box::new(abstract_body(a, x, x2, leaves)), Box::new(abstract_body(b, x, x2, leaves)))
        }
        Expr::Or(a, b) => {
            Prop::Or(Box::new(abstract_body(a, x, x2, leaves)), Box::new(abstract_body(b, x, x2, leaves)))
        }
        _ => unreachable!("two free variables only occur in atoms and connectives"),
    }
}

fn dnf(p: &Prop) -> Vec<Conjunction> {
    fn go(p: &Prop, pos: bool) -> Vec<Conjunction> {
        match (p, pos) {
            (Prop::Const(b), _) => {
                if *b == pos {
                    vec![Vec::new()]
                } else {
                    Vec::new()
                }
            }
            (Prop::Leaf(i), _) => vec![vec![(*i, pos)]],
            (Prop::Not(a), _) => go(a, !pos),
            (Prop::And(a, b), true) | (Prop::Or(a, b), false) => {
                let (l, r) = (go(a, pos), go(b, pos));
                let mut out = Vec::new();
                for c in &l {
                    for d in &r {
                        if let Some(m) = merge(c, d) {
                            out.push(m);
                        }
                    }
                }
                out
            }
            (Prop::Or(a, b), true) | (Prop::And(a, b), false) => {
                let mut out = go(a, pos);
                out.extend(go(b, pos));
                out
            }
        }
    }
    let mut out: Vec<Conjunction> = Vec::new();
    for c in go(p, true) {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Conjunction of two literal lists, or `None` if contradictory.
fn merge(a: &[Literal], b: &[Literal]) -> Option<Conjunction> {
    let mut out = a.to_vec();
    for &(l, pos) in b {
        if out.contains(&(l, !pos)) {
            return None;
        }
        if !out.contains(&(l, pos)) {
            out.push((l, pos));
        }
    }
    out.sort_unstable();
    Some(out)
}

/// Rewrites a disjunction of conjunctions into pairwise exclusive ones with
/// the same union. A new conjunction `g` is split against each earlier `d =
/// l_1 & ... & l_m` into `g & l_1 & ... & l_{j-1} & !l_j`.
fn disjoint(dnf: Vec<Conjunction>) -> Vec<Conjunction> {
    let mut done: Vec<Conjunction> = Vec::new();
    for g in dnf {
        let mut pieces = vec![g];
        for d in &done {
            let mut next = Vec::new();
            for piece in &pieces {
                let mut prefix: Conjunction = piece.clone();
                for &(l, pos) in d {
                    if let Some(p) = merge(&prefix, &[(l, !pos)]) {
                        next.push(p);
                    }
                    match merge(&prefix, &[(l, pos)]) {
                        Some(p) => prefix = p,
                        None => break,
                    }
                }
            }
            pieces = next;
        }
        done.extend(pieces);
    }
    done
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_graphs;
    use crate::logic::builtins::BuiltinRegistry;
    use crate::logic::eval::query_set;
    use crate::logic::parse::parse_formula;

    fn assert_equivalent(a: &Expr, b: &Expr, max_n: usize, labels: usize) {
        let reg = BuiltinRegistry::standard();
        for n in 1..=max_n {
            for g in enumerate_graphs(n, labels, 7).unwrap() {
                assert_eq!(query_set(&g, a, &reg).unwrap(), query_set(&g, b, &reg).unwrap(), "{g:?}");
            }
        }
    }

    #[test]
    fn compositions_sum_to_n() {
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(0, 3), vec![vec![0, 0, 0]]);
        assert!(compositions(1, 0).is_empty());
    }

    #[test]
    fn pieces_are_exclusive_and_cover() {
        // (a & b) | (b & c) | !a over three leaves
        let dnf = vec![vec![(0, true), (1, true)], vec![(1, true), (2, true)], vec![(0, false)]];
        let pieces = disjoint(dnf.clone());
        for bits in 0..8u32 {
            let holds = |c: &Conjunction| c.iter().all(|&(l, pos)| (bits >> l & 1 == 1) == pos);
            let covered = dnf.iter().any(holds);
            let count = pieces.iter().filter(|c| holds(c)).count();
            assert_eq!(count, usize::from(covered), "assignment {bits:03b}");
        }
    }

    #[test]
    fn pulls_out_the_centre_label() {
        let f = parse_formula("exists^{>=1} x2 . E(x1,x2) & P1(x1) & P1(x2)").unwrap();
        let m = gc_to_mc(&f).unwrap();
        assert!(classify_fragment(&m).is_mc);
        let expected = parse_formula("P1(x1) & exists x2 . E(x1,x2) & P1(x2)").unwrap();
        assert_equivalent(&m, &expected, 4, 1);
        assert_equivalent(&m, &f, 4, 1);
    }

    #[test]
    fn threshold_split_over_disjuncts() {
        let f = parse_formula("exists^{>=2} x2 . E(x1,x2) & (P1(x1) | P1(x2))").unwrap();
        let m = gc_to_mc(&f).unwrap();
        assert!(classify_fragment(&m).is_mc);
        assert_equivalent(&m, &f, 4, 1);
    }

    #[test]
    fn modal_input_is_kept() {
        let f = parse_formula("P1(x1) & exists^{>=2} x2 . E(x1,x2) & P1(x2)").unwrap();
        assert_eq!(gc_to_mc(&f).unwrap(), f.clone());
    }

    #[test]
    fn nested_and_reversed_guards() {
        let f = parse_formula(
            "exists^{>=2} x2 . E(x2,x1) & !(x1 = x2) & ((P1(x1) & P1(x2)) | (exists^{>=1} x1 . E(x2,x1) & P1(x1) & !P1(x2)))",
        )
        .unwrap();
        let m = gc_to_mc(&f).unwrap();
        assert!(classify_fragment(&m).is_mc);
        assert_equivalent(&m, &f, 4, 1);
    }

    #[test]
    fn rejects_unguarded() {
        let f = parse_formula("exists x2 . P1(x2)").unwrap();
        assert_eq!(gc_to_mc(&f), Err(TranslateError::NotInFragment("GC")));
    }
}
