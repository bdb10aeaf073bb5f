//! Guarded to modal translation for counting logic with arithmetic.
//!
//! Each guarded counting site `#(x', ...).(E(x,x') & psi)` whose body still
//! mentions `x` is rewritten: the maximal subformulas `chi_i` of `psi` with
//! only `x` free are replaced by their neighbour-side copies
//! `exists x (E(x',x) & zeta_i & chi_i)`, where `zeta_i(x,z,z_i)` pins `z_i`
//! to the residue modulo `z` of the set code of `chi_i` at `x`. A majority
//! vote over primes `z < ord^c` removes the dependence on `z`.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use super::primes::prime_supply_threshold;
use super::TranslateError;
use crate::graph::LabelledGraph;
use crate::logic::ast::{Binder, Expr, NVar, VVar};
use crate::logic::bound::effective_degrees;
use crate::logic::builtins::BuiltinRegistry;
use crate::logic::eval::{CompiledFormula, Valuation};
use crate::logic::fragment::{classify_fragment, guarded_binder, split_guard};
use crate::logic::simple::to_simple_form;
use crate::nat::Nat;

/// Largest set code, in bits, that `hash_codes` materialises.
pub const DEFAULT_CODE_BIT_CAP: u64 = 1 << 22;

/// A maximal subformula with one free vertex variable and its number
/// parameters in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XFormula {
    pub formula: Expr,
    pub vertex: VVar,
    pub params: Vec<NVar>,
}

/// One rewritten counting site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteReport {
    /// Free vertex variable of the site and the variable bound at it.
    pub x: VVar,
    pub bound: VVar,
    pub chis: Vec<XFormula>,
    pub z: NVar,
    pub residues: Vec<NVar>,
    pub zetas: Vec<Expr>,
    pub chi_primes: Vec<Expr>,
    /// The site formula before rewriting.
    pub original: Expr,
    /// The site with `z` free: one prime's worth of the construction.
    pub at_prime: Expr,
    /// The majority vote that replaces the site.
    pub majority: Expr,
    pub q: usize,
    pub k0: usize,
    pub c: u32,
    pub n0: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationResult {
    pub formula: Expr,
    /// The simple form the construction started from.
    pub simple: Expr,
    pub n0: u64,
    pub c: u32,
    pub q: usize,
    pub k0: usize,
    pub d: u32,
    pub sites: Vec<SiteReport>,
}

/// Translates a guarded formula with at most one free vertex variable into
/// a modal one, equivalent on graphs of order at least the returned `n0`.
pub fn guarded_to_modal(phi: &Expr, free_degs: &BTreeMap<NVar, u32>) -> Result<TranslationResult, TranslateError> {
    let report = classify_fragment(phi);
    if !report.is_gfoc {
        return Err(TranslateError::NotInFragment("GFO+C"));
    }
    if report.free_vertex.len() > 1 {
        return Err(TranslateError::TooManyFreeVertexVariables(report.free_vertex.len()));
    }
    let simple = to_simple_form(phi, free_degs)?;
    let degs = effective_degrees(&simple, free_degs)?;
    let d = degs.values().copied().max().unwrap_or(0);
    let fresh = simple.all_number_vars().iter().next_back().map_or(0, |m| m + 1);
    let mut t = Translator { d, fresh, sites: Vec::new(), supply: None };
    let formula = t.transform(&simple)?;
    let sites = t.sites;
    Ok(TranslationResult {
        formula,
        simple,
        n0: sites.iter().map(|s| s.n0).max().unwrap_or(2),
        c: sites.iter().map(|s| s.c).max().unwrap_or(0),
        q: sites.iter().map(|s| s.q).max().unwrap_or(0),
        k0: sites.iter().map(|s| s.k0).max().unwrap_or(0),
        d,
        sites,
    })
}

/// The translated formula with every majority vote replaced by the single
/// prime `p`.
pub fn render_at_prime(result: &TranslationResult, p: u64) -> Expr {
    let mut out = result.formula.clone();
    for site in result.sites.iter().rev() {
        let fixed = site.at_prime.subst_number(site.z, &Expr::Const(p));
        out = replace_exact(&out, &site.majority, &fixed);
    }
    out
}

fn replace_exact(e: &Expr, from: &Expr, to: &Expr) -> Expr {
    if e == from {
        return to.clone();
    }
    e.map_children(&mut |c| replace_exact(c, from, to))
}

struct Translator {
    d: u32,
    fresh: NVar,
    sites: Vec<SiteReport>,
    supply: Option<u64>,
}

/// Where the guarded count sits inside a site formula.
struct Site {
    x: VVar,
    bound: VVar,
    psi: Expr,
}

impl Translator {
    fn fresh(&mut self) -> NVar {
        let y = self.fresh;
        self.fresh += 1;
        y
    }

    fn transform(&mut self, e: &Expr) -> Result<Expr, TranslateError> {
        let mut err = None;
        let e = e.map_children(&mut |c| match self.transform(c) {
            Ok(t) => t,
            Err(x) => {
                err.get_or_insert(x);
                c.clone()
            }
        });
        if let Some(x) = err {
            return Err(x);
        }
        match site_of(&e) {
            Some(site) if site.psi.free_vertex_vars().contains(&site.x) => self.rewrite(&e, site),
            _ => Ok(e),
        }
    }

    fn rewrite(&mut self, original: &Expr, site: Site) -> Result<Expr, TranslateError> {
        let Site { x, bound, psi } = site;
        let psi = guard_simplify(&psi, x, bound);
        if !psi.free_vertex_vars().contains(&x) {
            return Ok(replace_body(original, &psi));
        }
        let z = self.fresh();
        let mut chis: Vec<XFormula> = Vec::new();
        let mut residues = Vec::new();
        let mut zetas = Vec::new();
        let mut chi_primes = Vec::new();
        let psi2 = self.replace_x_formulas(&psi, x, bound, z, &mut chis, &mut residues, &mut zetas, &mut chi_primes)?;
        let rewritten = replace_body(original, &psi2);

        let numbers: Vec<(NVar, Expr)> = residues.iter().map(|&zi| (zi, Expr::Num(z))).collect();
        let mut body = zetas.clone();
        body.push(rewritten);
        let at_prime = Expr::exists(Vec::new(), numbers, Expr::conj(body));

        let q = chis.len();
        let k0 = chis.iter().map(|c| c.params.len()).max().unwrap_or(0);
        let c = self.d * k0 as u32 + 3;
        let n0 = self.threshold(q as u64, k0 as u32, c)?;
        let prime = Expr::Builtin { name: "prime".into(), args: vec![Expr::Num(z)] };
        let all = Expr::count(Vec::new(), vec![(z, Expr::ord_pow(c))], prime.clone());
        let good = Expr::count(Vec::new(), vec![(z, Expr::ord_pow(c))], Expr::and(prime, at_prime.clone()));
        let majority = Expr::lt(all, Expr::mul(Expr::Const(2), good));

        self.sites.push(SiteReport {
            x,
            bound,
            chis,
            z,
            residues,
            zetas,
            chi_primes,
            original: original.clone(),
            at_prime,
            majority: majority.clone(),
            q,
            k0,
            c,
            n0,
        });
        Ok(majority)
    }

    #[allow(clippy::too_many_arguments)]
    fn replace_x_formulas(
        &mut self,
        e: &Expr,
        x: VVar,
        bound: VVar,
        z: NVar,
        chis: &mut Vec<XFormula>,
        residues: &mut Vec<NVar>,
        zetas: &mut Vec<Expr>,
        chi_primes: &mut Vec<Expr>,
    ) -> Result<Expr, TranslateError> {
        let fv = e.free_vertex_vars();
        if !fv.contains(&x) {
            return Ok(e.clone());
        }
        if !e.is_term() && !fv.contains(&bound) {
            let i = match chis.iter().position(|c| c.formula == *e) {
                Some(i) => i,
                None => {
                    let params: Vec<NVar> = e.free_number_vars().into_iter().collect();
                    let zi = self.fresh();
                    let zeta = self.zeta(e, &params, z, zi);
                    let chi_prime = Expr::exists(
                        vec![x],
                        Vec::new(),
                        Expr::and(Expr::Edge(bound, x), Expr::and(zeta.clone(), e.clone())),
                    );
                    chis.push(XFormula { formula: e.clone(), vertex: x, params });
                    residues.push(zi);
                    zetas.push(zeta);
                    chi_primes.push(chi_prime);
                    chis.len() - 1
                }
            };
            return Ok(chi_primes[i].clone());
        }
        match e {
            Expr::Not(_) | Expr::And(..) | Expr::Or(..) | Expr::Cmp(..) | Expr::Add(..) | Expr::Mul(..) => {}
            Expr::Builtin { .. } | Expr::ModRepr { .. } => {}
            Expr::Count(b) | Expr::Exists(b) if b.vertex.is_empty() => {}
            _ => {
                return Err(TranslateError::UnsupportedShape(alloc::format!(
                    "cannot separate x{x} from x{bound} in `{e}`"
                )))
            }
        }
        let mut err = None;
        let out = e.map_children(&mut |c| {
            match self.replace_x_formulas(c, x, bound, z, chis, residues, zetas, chi_primes) {
                Ok(t) => t,
                Err(x) => {
                    err.get_or_insert(x);
                    c.clone()
                }
            }
        });
        match err {
            Some(x) => Err(x),
            None => Ok(out),
        }
    }

    /// `zeta(x, z, zi)`: `zi` is the set code of `chi` at `x` modulo `z`.
    /// Bit `w` of the code is `chi(x, a_1, ..., a_k)` with `w` read in base
    /// `ord^d` as `a_1 + a_2 ord^d + ...`.
    fn zeta(&mut self, chi: &Expr, params: &[NVar], z: NVar, zi: NVar) -> Expr {
        let w = self.fresh();
        let k = params.len() as u32;
        let bit = match params {
            [] => chi.clone(),
            [y] => chi.subst_number(*y, &Expr::Num(w)),
            _ => {
                let digits: Vec<NVar> = params.iter().map(|_| self.fresh()).collect();
                let mut inner = chi.clone();
                for (y, a) in params.iter().zip(&digits) {
                    inner = inner.subst_number(*y, &Expr::Num(*a));
                }
                let mut value = Expr::Num(digits[0]);
                for (j, a) in digits.iter().enumerate().skip(1) {
                    value = Expr::add(value, Expr::mul(Expr::Num(*a), Expr::ord_pow(self.d * j as u32)));
                }
                let numbers = digits.iter().map(|&a| (a, Expr::ord_pow(self.d))).collect();
                Expr::exists(Vec::new(), numbers, Expr::and(Expr::eq(Expr::Num(w), value), inner))
            }
        };
        Expr::ModRepr {
            index: w,
            bit: Box::new(bit),
            bound: Box::new(Expr::ord_pow(self.d * k)),
            modulus: Box::new(Expr::Num(z)),
            result: Box::new(Expr::Num(zi)),
        }
    }

    fn threshold(&mut self, q: u64, k0: u32, c: u32) -> Result<u64, TranslateError> {
        let a = self.d * k0 + 2;
        let n_ineq = inequality_threshold(q, a, c)?;
        let sieve = match self.supply {
            Some(s) => s,
            None => {
                let s = prime_supply_threshold(10_000)?;
                self.supply = Some(s);
                s
            }
        };
        // the prime-supply bound is applied to 2 q^2 n^a primes
        let mut n_supply = 2u64;
        while 2 * q * q * n_supply.pow(a) < sieve {
            n_supply += 1;
        }
        Ok(n_ineq.max(n_supply).max(2))
    }
}

/// The smallest `n0 >= 2` such that `n^c >= 4 q^2 n^a ln(2 q^2 n^a)` holds
/// for every `n >= n0`.
pub fn inequality_threshold(q: u64, a: u32, c: u32) -> Result<u64, TranslateError> {
    const SEARCH_CAP: u64 = 10_000_000;
    if c <= a {
        return Err(TranslateError::NoThreshold { q, a, c });
    }
    let b = (c - a) as f64;
    let q2 = (q * q) as f64;
    let holds = |n: u64| {
        let x = n as f64;
        let lhs = libm::pow(x, b);
        let rhs = 4.0 * q2 * libm::log(2.0 * q2 * libm::pow(x, a as f64));
        lhs >= rhs * (1.0 + 1e-9)
    };
    // past this point the ratio n^b / ln(2 q^2 n^a) only grows
    let increasing = |n: u64| libm::log(2.0 * q2 * libm::pow(n as f64, a as f64)) * b > a as f64;
    let mut n = 2;
    while !(holds(n) && increasing(n)) {
        n += 1;
        if n > SEARCH_CAP {
            return Err(TranslateError::NoThreshold { q, a, c });
        }
    }
    while n > 2 && holds(n - 1) {
        n -= 1;
    }
    Ok(n)
}

fn site_of(e: &Expr) -> Option<Site> {
    match e {
        Expr::Exists(b) => guarded_binder(b).map(|(x, bound, psi)| Site { x, bound, psi }),
        Expr::CountQuant { var, body, .. } => split_guard(*var, body).map(|(x, psi)| Site { x, bound: *var, psi }),
        Expr::Cmp(_, l, r) => {
            let side = |t: &Expr, other: &Expr| match t {
                Expr::Count(b) if no_count(other) => guarded_binder(b),
                _ => None,
            };
            side(l, r).or_else(|| side(r, l)).map(|(x, bound, psi)| Site { x, bound, psi })
        }
        _ => None,
    }
}

fn no_count(t: &Expr) -> bool {
    match t {
        Expr::Count(_) => false,
        _ => t.children().into_iter().all(no_count),
    }
}

/// The site with the guard kept and the rest of the body replaced.
fn replace_body(site: &Expr, psi: &Expr) -> Expr {
    let rebuild = |b: &Binder| {
        let guard = (*b.body.conjuncts()[0]).clone();
        Binder { vertex: b.vertex.clone(), numbers: b.numbers.clone(), body: Box::new(Expr::and(guard, psi.clone())) }
    };
    match site {
        Expr::Exists(b) => Expr::Exists(rebuild(b)),
        Expr::CountQuant { threshold, var, body } => {
            let guard = (*body.conjuncts()[0]).clone();
            Expr::CountQuant { threshold: *threshold, var: *var, body: Box::new(Expr::and(guard, psi.clone())) }
        }
        Expr::Cmp(op, l, r) => {
            let swap = |t: &Expr| match t {
                Expr::Count(b) => Expr::Count(rebuild(b)),
                _ => t.clone(),
            };
            if matches!(**l, Expr::Count(_)) && no_count(r) {
                Expr::cmp(*op, swap(l), (**r).clone())
            } else {
                Expr::cmp(*op, (**l).clone(), swap(r))
            }
        }
        _ => unreachable!("not a site"),
    }
}

/// Sets `E(x,x')`, `E(x',x)` to true and `x = x'` to false outside every
/// subformula that has only one of the two free.
fn guard_simplify(e: &Expr, x: VVar, x2: VVar) -> Expr {
    let fv = e.free_vertex_vars();
    if !(fv.contains(&x) && fv.contains(&x2)) {
        return e.clone();
    }
    match e {
        Expr::Edge(..) => Expr::True,
        Expr::VertexEq(..) => Expr::False,
        _ => e.map_children(&mut |c| guard_simplify(c, x, x2)),
    }
}

/// Set codes `N_i(v)`: bit `<a>` of `N_i(v)` is set iff `chi_i(v, a)`,
/// with tuples read in base `n^d`. Indexed `[i][v]`.
pub fn hash_codes(
    g: &LabelledGraph,
    chis: &[XFormula],
    d: u32,
    reg: &BuiltinRegistry,
    bit_cap: u64,
) -> Result<Vec<Vec<BigUint>>, TranslateError> {
    let n = g.order() as u64;
    let m = n.checked_pow(d).ok_or(TranslateError::CapExceeded { what: "code base", value: u64::MAX, cap: bit_cap })?;
    let mut out = Vec::with_capacity(chis.len());
    for chi in chis {
        let bits = m
            .checked_pow(chi.params.len() as u32)
            .filter(|&b| b <= bit_cap)
            .ok_or(TranslateError::CapExceeded { what: "set code bits", value: m, cap: bit_cap })?;
        let compiled = CompiledFormula::compile(&chi.formula, reg)?;
        let mut ev = compiled.evaluator(g)?;
        let mut codes = Vec::with_capacity(g.order());
        for v in 0..g.order() {
            let mut code = BigUint::zero();
            for w in 0..bits {
                let mut val = Valuation::new().with_vertex(chi.vertex, v);
                let mut rest = w;
                for &y in &chi.params {
                    val.number.insert(y, Nat::from(rest % m.max(1)));
                    rest /= m.max(1);
                }
                if ev.eval_bool(&val)? {
                    code.set_bit(w, true);
                }
            }
            codes.push(code);
        }
        out.push(codes);
    }
    Ok(out)
}

/// Whether no two distinct set codes of `g` are congruent modulo `p`.
pub fn good_prime_check(
    g: &LabelledGraph,
    chis: &[XFormula],
    d: u32,
    p: u64,
    reg: &BuiltinRegistry,
    bit_cap: u64,
) -> Result<bool, TranslateError> {
    let codes = hash_codes(g, chis, d, reg, bit_cap)?;
    Ok(is_good_prime(&codes, p))
}

/// Goodness of `p` for precomputed codes.
pub fn is_good_prime(codes: &[Vec<BigUint>], p: u64) -> bool {
    DistinctCodes::new(codes).is_good(p)
}

/// The distinct set codes of a graph, kept as little-endian words for
/// repeated residue checks.
#[derive(Debug, Clone)]
pub struct DistinctCodes {
    words: Vec<Vec<u64>>,
}

impl DistinctCodes {
    pub fn new(codes: &[Vec<BigUint>]) -> Self {
        let distinct: BTreeSet<&BigUint> = codes.iter().flatten().collect();
        DistinctCodes { words: distinct.into_iter().map(|c| c.iter_u64_digits().collect()).collect() }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_good(&self, p: u64) -> bool {
        let wide = p as u128;
        let mut residues: Vec<u64> = self
            .words
            .iter()
            .map(|w| w.iter().rev().fold(0u128, |r, &d| ((r << 64) | d as u128) % wide) as u64)
            .collect();
        residues.sort_unstable();
        residues.windows(2).all(|w| w[0] != w[1])
    }
}

/// `code mod p` by a word-wise Horner pass.
pub fn residue(code: &BigUint, p: u64) -> u64 {
    let p = p as u128;
    code.iter_u64_digits().rev().fold(0u128, |r, d| ((r << 64) | d as u128) % p) as u64
}

/// The smallest good prime below `limit`, if any.
pub fn first_good_prime(codes: &[Vec<BigUint>], primes: &[u64], limit: u64) -> Option<u64> {
    let distinct = DistinctCodes::new(codes);
    primes.iter().copied().take_while(|&p| p < limit).find(|&p| distinct.is_good(p))
}

/// Outcome of checking the construction on one graph and one good prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimReport {
    pub prime: u64,
    /// `zeta_i(v, p, b)` holds exactly for `b = N_i(v) mod p`.
    pub residues_pinned: bool,
    /// `chi_i(v, a)` iff `chi_i'(v', a, p, n_i(v,p))` for every edge.
    pub neighbour_copies: bool,
    /// The input and the translation at `p` define the same vertex set.
    pub single_prime: bool,
}

impl ClaimReport {
    pub fn all(&self) -> bool {
        self.residues_pinned && self.neighbour_copies && self.single_prime
    }
}

/// Checks the per-site claims for `site` on `g` at the good prime `p`, and
/// compares `phi` (one free vertex variable) with the translation rendered
/// at `p`.
pub fn check_claims(
    g: &LabelledGraph,
    phi: &Expr,
    result: &TranslationResult,
    site: &SiteReport,
    p: u64,
    reg: &BuiltinRegistry,
) -> Result<ClaimReport, TranslateError> {
    let codes = hash_codes(g, &site.chis, result.d, reg, DEFAULT_CODE_BIT_CAP)?;
    let n = g.order() as u64;
    let m = n.pow(result.d);
    let mut residues_pinned = true;
    let mut neighbour_copies = true;
    for (i, chi) in site.chis.iter().enumerate() {
        let zeta = CompiledFormula::compile(&site.zetas[i], reg)?;
        let mut zeta_ev = zeta.evaluator(g)?;
        let chi_c = CompiledFormula::compile(&chi.formula, reg)?;
        let mut chi_ev = chi_c.evaluator(g)?;
        let copy = CompiledFormula::compile(&site.chi_primes[i], reg)?;
        let mut copy_ev = copy.evaluator(g)?;
        for v in 0..g.order() {
            let r = residue(&codes[i][v], p);
            let probes: BTreeSet<u64> = (0..p.min(64)).chain([r, (r + 1) % p, (r + p - 1) % p]).collect();
            for b in probes {
                let val = Valuation::new().with_vertex(site.x, v).with_number(site.z, p).with_number(site.residues[i], b);
                if zeta_ev.eval_bool(&val)? != (b == r) {
                    residues_pinned = false;
                }
            }
            let tuples = m.pow(chi.params.len() as u32);
            for &u in g.neighbours(v) {
                for w in 0..tuples {
                    let mut a = Valuation::new();
                    let mut rest = w;
                    for &y in &chi.params {
                        a.number.insert(y, Nat::from(rest % m.max(1)));
                        rest /= m.max(1);
                    }
                    let mut lhs = a.clone();
                    lhs.vertex.insert(site.x, v);
                    let rhs = a.with_vertex(site.bound, u).with_number(site.z, p).with_number(site.residues[i], r);
                    if chi_ev.eval_bool(&lhs)? != copy_ev.eval_bool(&rhs)? {
                        neighbour_copies = false;
                    }
                }
            }
        }
    }
    let rendered = render_at_prime(result, p);
    let single_prime = crate::logic::eval::query_set(g, phi, reg)? == crate::logic::eval::query_set(g, &rendered, reg)?;
    Ok(ClaimReport { prime: p, residues_pinned, neighbour_copies, single_prime })
}
