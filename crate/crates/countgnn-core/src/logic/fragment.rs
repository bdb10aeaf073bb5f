//! Syntactic fragment membership.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::ast::{Binder, Expr, NVar, VVar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentReport {
    pub is_c: bool,
    pub is_c2: bool,
    pub is_mc: bool,
    pub is_gc: bool,
    pub is_foc2: bool,
    pub is_mfoc: bool,
    pub is_gfoc: bool,
    pub is_arithmetical: bool,
    /// Distinct vertex variables occurring anywhere.
    pub vertex_var_count: usize,
    pub free_vertex: Vec<VVar>,
    pub free_number: Vec<NVar>,
}

pub fn classify_fragment(e: &Expr) -> FragmentReport {
    let vars = e.all_vertex_vars();
    let two = vars.iter().all(|&x| x == 1 || x == 2);
    let is_c = is_counting_logic(e);
    let is_c2 = is_c && two;
    let is_gc = is_c2 && local(e, false);
    let is_mc = is_gc && local(e, true);
    let is_foc2 = two;
    let is_gfoc = two && local(e, false);
    let is_mfoc = is_gfoc && local(e, true);
    FragmentReport {
        is_c,
        is_c2,
        is_mc,
        is_gc,
        is_foc2,
        is_mfoc,
        is_gfoc,
        is_arithmetical: vars.is_empty(),
        vertex_var_count: vars.len(),
        free_vertex: e.free_vertex_vars().into_iter().collect(),
        free_number: e.free_number_vars().into_iter().collect(),
    }
}

/// Formulas built from atoms, connectives and vertex quantifiers only.
fn is_counting_logic(e: &Expr) -> bool {
    match e {
        Expr::True | Expr::False | Expr::VertexEq(..) | Expr::Edge(..) | Expr::Label(..) => true,
        Expr::Not(a) => is_counting_logic(a),
        Expr::And(a, b) | Expr::Or(a, b) => is_counting_logic(a) && is_counting_logic(b),
        Expr::CountQuant { body, .. } => is_counting_logic(body),
        Expr::Exists(b) => b.numbers.is_empty() && !b.vertex.is_empty() && is_counting_logic(&b.body),
        _ => false,
    }
}

/// A guarded binder body `E(x,x') & psi` (either edge orientation) for the
/// bound variable `bound`. Returns the guarding variable `x` and `psi`.
pub fn split_guard(bound: VVar, body: &Expr) -> Option<(VVar, Expr)> {
    let parts = body.conjuncts();
    let (first, rest) = parts.split_first()?;
    let other = match **first {
        Expr::Edge(a, b) if b == bound && a != bound => a,
        Expr::Edge(a, b) if a == bound && b != bound => b,
        _ => return None,
    };
    Some((other, Expr::conj(rest.iter().map(|e| (*e).clone()).collect())))
}

/// Guarded binder shape for a single vertex variable.
pub fn guarded_binder(b: &Binder) -> Option<(VVar, VVar, Expr)> {
    if b.vertex.len() != 1 {
        return None;
    }
    let x_bound = b.vertex[0];
    split_guard(x_bound, &b.body).map(|(x, psi)| (x, x_bound, psi))
}

fn local(e: &Expr, modal: bool) -> bool {
    let check = |x: VVar, psi: &Expr| -> bool { !modal || !psi.free_vertex_vars().contains(&x) };
    match e {
        Expr::Count(b) | Expr::Exists(b) => {
            let bounds_ok = b.numbers.iter().all(|(_, t)| local(t, modal));
            if b.vertex.is_empty() {
                return bounds_ok && local(&b.body, modal);
            }
            match guarded_binder(b) {
                Some((x, _, psi)) => bounds_ok && check(x, &psi) && local(&psi, modal),
                None => false,
            }
        }
        Expr::CountQuant { var, body, .. } => match split_guard(*var, body) {
            Some((x, psi)) => check(x, &psi) && local(&psi, modal),
            None => false,
        },
        _ => e.children().into_iter().all(|c| local(c, modal)),
    }
}

/// Vertex variables of `e` that are not bound anywhere inside it.
pub fn free_vertex_set(e: &Expr) -> BTreeSet<VVar> {
    e.free_vertex_vars()
}
