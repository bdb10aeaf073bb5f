//! Value bounds for terms and degrees of number variables.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use super::ast::{Binder, Expr, NVar};

/// Largest `n` examined explicitly when certifying `p(n) < n^c` for all
/// `n >= 2`; beyond it the coefficient-sum argument takes over.
const EXPLICIT_CHECK_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("expected a term, found a formula")]
    NotATerm,
    #[error("bound polynomial coefficients overflow 64 bits")]
    Overflow,
    #[error("free number variable y{0} has no declared degree")]
    MissingDegree(NVar),
    #[error("number variable y{0} is introduced more than once")]
    Reintroduced(NVar),
}

/// Polynomial in `X` with natural coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundPolynomial {
    coeffs: Vec<u64>,
}

impl BoundPolynomial {
    pub fn constant(c: u64) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn x() -> Self {
        Self::from_coeffs(vec![0, 1])
    }

    pub fn x_pow(k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        Self::from_coeffs(c)
    }

    pub fn from_coeffs(mut coeffs: Vec<u64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        BoundPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == [0]
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn add(&self, other: &Self) -> Result<Self, BoundError> {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; len];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *slot = a.checked_add(b).ok_or(BoundError::Overflow)?;
        }
        Ok(Self::from_coeffs(out))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, BoundError> {
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                let p = a.checked_mul(b).ok_or(BoundError::Overflow)?;
                out[i + j] = out[i + j].checked_add(p).ok_or(BoundError::Overflow)?;
            }
        }
        Ok(Self::from_coeffs(out))
    }

    /// `self(inner(X))`
    pub fn compose(&self, inner: &Self) -> Result<Self, BoundError> {
        let mut acc = Self::constant(0);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(inner)?.add(&Self::constant(c))?;
        }
        Ok(acc)
    }

    pub fn eval(&self, n: &BigUint) -> BigUint {
        let mut acc = BigUint::from(0u32);
        for &c in self.coeffs.iter().rev() {
            acc = acc * n + BigUint::from(c);
        }
        acc
    }

    /// The least `c` with `p(n) < n^c` for every `n >= 2`.
    pub fn minimal_exponent(&self) -> u32 {
        if self.is_zero() {
            return 0;
        }
        let deg = self.degree() as u32;
        let sum: u128 = self.coeffs.iter().map(|&c| c as u128).sum();
        let mut c = deg + 1;
        loop {
            if let Some(limit) = self.certify(c, deg, sum) {
                if (2..=limit).all(|n| {
                    let n = BigUint::from(n);
                    self.eval(&n) < n.pow(c)
                }) {
                    return c;
                }
            }
            c += 1;
        }
    }

    // Smallest n with n^(c-deg) > sum, if it is within the explicit cap.
    fn certify(&self, c: u32, deg: u32, sum: u128) -> Option<u64> {
        let gap = c - deg;
        let mut n: u64 = 2;
        loop {
            let lhs = BigUint::from(n).pow(gap);
            if lhs > BigUint::from(sum) {
                return Some(n);
            }
            n += 1;
            if n > EXPLICIT_CHECK_CAP {
                return None;
            }
        }
    }
}

impl fmt::Display for BoundPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let s = match (i, c) {
                (0, c) => alloc::format!("{c}"),
                (1, 1) => "X".into(),
                (1, c) => alloc::format!("{c}X"),
                (i, 1) => alloc::format!("X^{i}"),
                (i, c) => alloc::format!("{c}X^{i}"),
            };
            parts.push(s);
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Bound polynomial of a term. Number variables not introduced inside the
/// term contribute `X`.
pub fn term_bound_polynomial(t: &Expr) -> Result<BoundPolynomial, BoundError> {
    poly(t, &BTreeMap::new())
}

fn poly(t: &Expr, env: &BTreeMap<NVar, BoundPolynomial>) -> Result<BoundPolynomial, BoundError> {
    match t {
        Expr::Const(c) => Ok(BoundPolynomial::constant(*c)),
        Expr::Ord => Ok(BoundPolynomial::x()),
        Expr::Num(y) => Ok(env.get(y).cloned().unwrap_or_else(BoundPolynomial::x)),
        Expr::Add(a, b) => poly(a, env)?.add(&poly(b, env)?),
        Expr::Mul(a, b) => poly(a, env)?.mul(&poly(b, env)?),
        Expr::Count(b) => {
            let mut env = env.clone();
            let mut acc = BoundPolynomial::x_pow(b.vertex.len());
            for (y, bound) in &b.numbers {
                let p = poly(bound, &env)?;
                acc = acc.mul(&p)?;
                // a value below p(..) is itself bounded by p(..)
                env.insert(*y, p);
            }
            Ok(acc)
        }
        _ => Err(BoundError::NotATerm),
    }
}

/// Degree of a variable bounded by `bound`, given the degrees of the number
/// variables in scope: the least `c` with `p(n) < n^c`, times the largest
/// degree among the bound's free number variables if it has any.
pub fn bound_degree(bound: &Expr, degrees: &BTreeMap<NVar, u32>) -> Result<u32, BoundError> {
    let c = term_bound_polynomial(bound)?.minimal_exponent();
    let free = bound.free_number_vars();
    if free.is_empty() {
        return Ok(c);
    }
    let mut d = 0;
    for y in free {
        d = d.max(*degrees.get(&y).ok_or(BoundError::MissingDegree(y))?);
    }
    Ok(c * d)
}

/// Like [`bound_degree`], except that a literal `ord^e` bound already keeps
/// values below `n^e` and so yields `e`. Simple forms are read this way.
pub fn effective_bound_degree(bound: &Expr, degrees: &BTreeMap<NVar, u32>) -> Result<u32, BoundError> {
    match ord_power(bound) {
        Some(e) => Ok(e),
        None => bound_degree(bound, degrees),
    }
}

/// `Some(e)` when the term is literally `ord^e` (with `ord^0` written `1`).
pub fn ord_power(t: &Expr) -> Option<u32> {
    match t {
        Expr::Const(1) => Some(0),
        Expr::Ord => Some(1),
        Expr::Mul(a, b) if **b == Expr::Ord => ord_power(a).filter(|&e| e >= 1).map(|e| e + 1),
        _ => None,
    }
}

/// Degrees of all number variables of `e`: declared ones for free
/// variables, computed ones for variables introduced by binders.
pub fn variable_degrees(e: &Expr, free_degs: &BTreeMap<NVar, u32>) -> Result<BTreeMap<NVar, u32>, BoundError> {
    degrees_with(e, free_degs, bound_degree)
}

/// Degrees as read off a simple form, where every bound is `ord^e`.
pub fn effective_degrees(e: &Expr, free_degs: &BTreeMap<NVar, u32>) -> Result<BTreeMap<NVar, u32>, BoundError> {
    degrees_with(e, free_degs, effective_bound_degree)
}

type DegreeRule = fn(&Expr, &BTreeMap<NVar, u32>) -> Result<u32, BoundError>;

fn degrees_with(e: &Expr, free_degs: &BTreeMap<NVar, u32>, rule: DegreeRule) -> Result<BTreeMap<NVar, u32>, BoundError> {
    let mut out = BTreeMap::new();
    for y in e.free_number_vars() {
        out.insert(y, *free_degs.get(&y).ok_or(BoundError::MissingDegree(y))?);
    }
    let mut scope = out.clone();
    collect_degrees(e, rule, &mut scope, &mut out)?;
    Ok(out)
}

fn collect_degrees(
    e: &Expr,
    rule: DegreeRule,
    scope: &mut BTreeMap<NVar, u32>,
    out: &mut BTreeMap<NVar, u32>,
) -> Result<(), BoundError> {
    let introduce = |y: NVar, d: u32, out: &mut BTreeMap<NVar, u32>| -> Result<(), BoundError> {
        if out.insert(y, d).is_some() {
            return Err(BoundError::Reintroduced(y));
        }
        Ok(())
    };
    match e {
        Expr::Count(Binder { numbers, body, .. }) | Expr::Exists(Binder { numbers, body, .. }) => {
            let saved = scope.clone();
            for (y, t) in numbers {
                collect_degrees(t, rule, scope, out)?;
                let d = rule(t, scope)?;
                introduce(*y, d, out)?;
                scope.insert(*y, d);
            }
            collect_degrees(body, rule, scope, out)?;
            *scope = saved;
            Ok(())
        }
        Expr::ModRepr { index, bit, bound, modulus, result } => {
            for t in [bound, modulus, result] {
                collect_degrees(t, rule, scope, out)?;
            }
            let d = rule(bound, scope)?;
            introduce(*index, d, out)?;
            let saved = scope.clone();
            scope.insert(*index, d);
            collect_degrees(bit, rule, scope, out)?;
            *scope = saved;
            Ok(())
        }
        _ => {
            for c in e.children() {
                collect_degrees(c, rule, scope, out)?;
            }
            Ok(())
        }
    }
}
