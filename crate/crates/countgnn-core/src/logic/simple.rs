//! Simple normal form: every number binder is bounded by a power of `ord`
//! and counting terms occur only in atoms `y = #(...)`.
//!
//! The result agrees with the input on graphs of order at least 2.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::ast::{Binder, Expr, NVar};
use super::bound::{effective_bound_degree, ord_power, BoundError};
use super::fragment::split_guard;

/// Renames every number variable introduced by a binder to a fresh id so
/// that no variable is introduced twice or shadows a free one. Returns the
/// renamed expression and the next unused id.
pub fn alpha_rename_numbers(e: &Expr) -> (Expr, NVar) {
    let mut next = e.all_number_vars().iter().next_back().map_or(0, |m| m + 1);
    let out = rename(e, &BTreeMap::new(), &mut next);
    (out, next)
}

fn rename(e: &Expr, map: &BTreeMap<NVar, NVar>, next: &mut NVar) -> Expr {
    match e {
        Expr::Num(y) => Expr::Num(*map.get(y).unwrap_or(y)),
        Expr::Count(b) | Expr::Exists(b) => {
            let mut inner = map.clone();
            let mut numbers = Vec::with_capacity(b.numbers.len());
            for (y, t) in &b.numbers {
                let t = rename(t, &inner, next);
                let fresh = *next;
                *next += 1;
                inner.insert(*y, fresh);
                numbers.push((fresh, t));
            }
            let nb = Binder { vertex: b.vertex.clone(), numbers, body: Box::new(rename(&b.body, &inner, next)) };
            if matches!(e, Expr::Count(_)) {
                Expr::Count(nb)
            } else {
                Expr::Exists(nb)
            }
        }
        Expr::ModRepr { index, bit, bound, modulus, result } => {
            let fresh = *next;
            *next += 1;
            let mut inner = map.clone();
            inner.insert(*index, fresh);
            Expr::ModRepr {
                index: fresh,
                bit: Box::new(rename(bit, &inner, next)),
                bound: Box::new(rename(bound, map, next)),
                modulus: Box::new(rename(modulus, map, next)),
                result: Box::new(rename(result, map, next)),
            }
        }
        _ => e.map_children(&mut |c| rename(c, map, next)),
    }
}

/// Simple form of `e`. Free number variables need entries in `free_degs`.
pub fn to_simple_form(e: &Expr, free_degs: &BTreeMap<NVar, u32>) -> Result<Expr, BoundError> {
    let mut env = BTreeMap::new();
    for y in e.free_number_vars() {
        env.insert(y, *free_degs.get(&y).ok_or(BoundError::MissingDegree(y))?);
    }
    let (renamed, mut fresh) = alpha_rename_numbers(e);
    simp(&renamed, &env, &mut fresh)
}

fn simp(e: &Expr, env: &BTreeMap<NVar, u32>, fresh: &mut NVar) -> Result<Expr, BoundError> {
    match e {
        Expr::Count(b) => Ok(Expr::Count(simp_binder(b, env, fresh)?)),
        Expr::Exists(b) => Ok(Expr::Exists(simp_binder(b, env, fresh)?)),
        Expr::CountQuant { threshold, var, body } => {
            Ok(Expr::CountQuant { threshold: *threshold, var: *var, body: Box::new(simp(body, env, fresh)?) })
        }
        Expr::Not(a) => Ok(Expr::not(simp(a, env, fresh)?)),
        Expr::And(a, b) => Ok(Expr::and(simp(a, env, fresh)?, simp(b, env, fresh)?)),
        Expr::Or(a, b) => Ok(Expr::or(simp(a, env, fresh)?, simp(b, env, fresh)?)),
        Expr::Cmp(op, a, b) => {
            if let (crate::logic::CmpOp::Eq, Expr::Num(y), Expr::Count(_)) = (op, &**a, &**b) {
                if !b.free_number_vars().contains(y) {
                    return Ok(Expr::eq(Expr::Num(*y), simp(b, env, fresh)?));
                }
            }
            let op = *op;
            hoist(alloc::vec![(**a).clone(), (**b).clone()], &move |mut t| {
                let b = t.pop().unwrap();
                let a = t.pop().unwrap();
                Expr::cmp(op, a, b)
            }, env, fresh)
        }
        Expr::Builtin { name, args } => {
            let name = name.clone();
            hoist(args.clone(), &move |t| Expr::Builtin { name: name.clone(), args: t }, env, fresh)
        }
        Expr::ModRepr { index, bit, bound, modulus, result } => {
            let d = effective_bound_degree(bound, env)?;
            let (bound, bit) = if ord_power(bound) == Some(d) {
                ((**bound).clone(), (**bit).clone())
            } else {
                (Expr::ord_pow(d), Expr::and(Expr::lt(Expr::Num(*index), (**bound).clone()), (**bit).clone()))
            };
            let mut inner = env.clone();
            inner.insert(*index, d);
            let bit = simp(&bit, &inner, fresh)?;
            let index = *index;
            hoist(
                alloc::vec![(**modulus).clone(), (**result).clone()],
                &move |mut t| {
                    let result = t.pop().unwrap();
                    let modulus = t.pop().unwrap();
                    Expr::ModRepr {
                        index,
                        bit: Box::new(bit.clone()),
                        bound: Box::new(bound.clone()),
                        modulus: Box::new(modulus),
                        result: Box::new(result),
                    }
                },
                env,
                fresh,
            )
        }
        _ => Ok(e.clone()),
    }
}

fn simp_binder(b: &Binder, env: &BTreeMap<NVar, u32>, fresh: &mut NVar) -> Result<Binder, BoundError> {
    let mut inner = env.clone();
    let mut numbers = Vec::with_capacity(b.numbers.len());
    let mut extra = Vec::new();
    for (y, t) in &b.numbers {
        let d = effective_bound_degree(t, &inner)?;
        if ord_power(t) == Some(d) {
            numbers.push((*y, t.clone()));
        } else {
            numbers.push((*y, Expr::ord_pow(d)));
            extra.push(Expr::lt(Expr::Num(*y), t.clone()));
        }
        inner.insert(*y, d);
    }
    let body = if extra.is_empty() {
        (*b.body).clone()
    } else {
        // keep a guard in front so guarded shapes survive
        let guard = (b.vertex.len() == 1).then(|| split_guard(b.vertex[0], &b.body)).flatten();
        match guard {
            Some((_, psi)) => {
                let edge = (*b.body.conjuncts()[0]).clone();
                extra.push(psi);
                Expr::and(edge, Expr::conj(extra))
            }
            None => {
                extra.push((*b.body).clone());
                Expr::conj(extra)
            }
        }
    };
    Ok(Binder { vertex: b.vertex.clone(), numbers, body: Box::new(simp(&body, &inner, fresh)?) })
}

/// Pulls counting terms out of the term arguments of an atom, one fresh
/// variable per distinct term: `exists (y < ord^d) . y = #(..) & atom[y]`.
fn hoist(
    terms: Vec<Expr>,
    rebuild: &dyn Fn(Vec<Expr>) -> Expr,
    env: &BTreeMap<NVar, u32>,
    fresh: &mut NVar,
) -> Result<Expr, BoundError> {
    let Some(target) = terms.iter().find_map(first_count) else {
        return Ok(rebuild(terms));
    };
    let simplified = simp(&target, env, fresh)?;
    let d = effective_bound_degree(&simplified, env)?;
    let y = *fresh;
    *fresh += 1;
    let replaced: Vec<Expr> = terms.iter().map(|t| t.replace_subterm(&target, &Expr::Num(y))).collect();
    let rest = hoist(replaced, rebuild, env, fresh)?;
    Ok(Expr::exists(
        Vec::new(),
        alloc::vec![(y, Expr::ord_pow(d))],
        Expr::and(Expr::eq(Expr::Num(y), simplified), rest),
    ))
}

fn first_count(t: &Expr) -> Option<Expr> {
    match t {
        Expr::Count(_) => Some(t.clone()),
        Expr::Add(a, b) | Expr::Mul(a, b) => first_count(a).or_else(|| first_count(b)),
        _ => None,
    }
}

/// Whether every number bound is a power of `ord` and counting terms occur
/// only as `y = #(...)` with `y` not free in the term.
pub fn is_simple(e: &Expr) -> bool {
    match e {
        Expr::Cmp(crate::logic::CmpOp::Eq, a, b) => match (&**a, &**b) {
            (Expr::Num(y), Expr::Count(c)) if !b.free_number_vars().contains(y) => binder_simple(c),
            _ => no_count(a) && no_count(b),
        },
        Expr::Count(_) => false,
        Expr::Exists(b) => binder_simple(b),
        Expr::ModRepr { bit, bound, modulus, result, .. } => {
            ord_power(bound).is_some() && is_simple(bit) && no_count(modulus) && no_count(result)
        }
        Expr::Builtin { args, .. } => args.iter().all(no_count),
        _ => e.children().into_iter().all(is_simple),
    }
}

fn binder_simple(b: &Binder) -> bool {
    b.numbers.iter().all(|(_, t)| ord_power(t).is_some()) && is_simple(&b.body)
}

fn no_count(t: &Expr) -> bool {
    match t {
        Expr::Count(_) => false,
        _ => t.children().into_iter().all(no_count),
    }
}
