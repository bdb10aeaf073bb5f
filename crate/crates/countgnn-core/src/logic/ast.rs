//! Two-sorted expression trees for first-order logic with counting.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

/// Vertex variable `x<k>`.
pub type VVar = u32;
/// Number variable `y<k>`.
pub type NVar = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Le,
    Lt,
    Eq,
}

/// Variables bound by a counting term or an existential block. Each number
/// bound may mention the vertex variables and the earlier number variables
/// of the same binder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binder {
    pub vertex: Vec<VVar>,
    pub numbers: Vec<(NVar, Expr)>,
    pub body: Box<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    // terms
    Const(u64),
    Ord,
    Num(NVar),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Count(Binder),
    // formulas
    True,
    False,
    VertexEq(VVar, VVar),
    Edge(VVar, VVar),
    /// `P<k>(x)`, with `k` counted from 1.
    Label(u32, VVar),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    /// Holds iff the binder has at least one satisfying tuple.
    Exists(Binder),
    /// `exists^{>=n} x . body`
    CountQuant { threshold: u64, var: VVar, body: Box<Expr> },
    Builtin { name: String, args: Vec<Expr> },
    /// True iff `result = (sum of 2^index over index < bound with bit) mod modulus`.
    /// `index` is bound in `bit` only.
    ModRepr { index: NVar, bit: Box<Expr>, bound: Box<Expr>, modulus: Box<Expr>, result: Box<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Term,
    Formula,
}

impl Expr {
    pub fn sort(&self) -> Sort {
        match self {
            Expr::Const(_) | Expr::Ord | Expr::Num(_) | Expr::Add(..) | Expr::Mul(..) | Expr::Count(_) => Sort::Term,
            _ => Sort::Formula,
        }
    }

    pub fn is_term(&self) -> bool {
        self.sort() == Sort::Term
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Self::cmp(CmpOp::Eq, a, b)
    }

    pub fn lt(a: Expr, b: Expr) -> Expr {
        Self::cmp(CmpOp::Lt, a, b)
    }

    pub fn le(a: Expr, b: Expr) -> Expr {
        Self::cmp(CmpOp::Le, a, b)
    }

    /// Conjunction of a list, `tt` when empty.
    pub fn conj(items: Vec<Expr>) -> Expr {
        let mut it = items.into_iter();
        match it.next() {
            None => Expr::True,
            Some(first) => it.fold(first, Expr::and),
        }
    }

    /// Disjunction of a list, `ff` when empty.
    pub fn disj(items: Vec<Expr>) -> Expr {
        let mut it = items.into_iter();
        match it.next() {
            None => Expr::False,
            Some(first) => it.fold(first, Expr::or),
        }
    }

    /// `ord^d`, with `ord^0 = 1`.
    pub fn ord_pow(d: u32) -> Expr {
        match d {
            0 => Expr::Const(1),
            _ => (1..d).fold(Expr::Ord, |acc, _| Expr::mul(acc, Expr::Ord)),
        }
    }

    pub fn count(vertex: Vec<VVar>, numbers: Vec<(NVar, Expr)>, body: Expr) -> Expr {
        Expr::Count(Binder { vertex, numbers, body: Box::new(body) })
    }

    pub fn exists(vertex: Vec<VVar>, numbers: Vec<(NVar, Expr)>, body: Expr) -> Expr {
        Expr::Exists(Binder { vertex, numbers, body: Box::new(body) })
    }

    /// `#x'.(E(x,x') & x'=x')`
    pub fn degree(x: VVar, other: VVar) -> Expr {
        Expr::count(vec_of(other), Vec::new(), Expr::and(Expr::Edge(x, other), Expr::VertexEq(other, other)))
    }

    /// Conjuncts of a right- or left-nested conjunction, in order.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            if let Expr::And(a, b) = e {
                go(a, out);
                go(b, out);
            } else {
                out.push(e);
            }
        }
        go(self, &mut out);
        out
    }

    /// Direct children in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_)
            | Expr::Ord
            | Expr::Num(_)
            | Expr::True
            | Expr::False
            | Expr::VertexEq(..)
            | Expr::Edge(..)
            | Expr::Label(..) => Vec::new(),
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Cmp(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                let mut v = Vec::new();
                v.push(&**a);
                v.push(&**b);
                v
            }
            Expr::Not(a) => {
                let mut v = Vec::new();
                v.push(&**a);
                v
            }
            Expr::Count(b) | Expr::Exists(b) => {
                let mut v: Vec<&Expr> = b.numbers.iter().map(|(_, t)| t).collect();
                v.push(&b.body);
                v
            }
            Expr::CountQuant { body, .. } => {
                let mut v = Vec::new();
                v.push(&**body);
                v
            }
            Expr::Builtin { args, .. } => args.iter().collect(),
            Expr::ModRepr { bit, bound, modulus, result, .. } => {
                let mut v = Vec::new();
                v.push(&**bit);
                v.push(&**bound);
                v.push(&**modulus);
                v.push(&**result);
                v
            }
        }
    }

    /// Rebuilds the node with every direct child passed through `f`.
    pub fn map_children(&self, f: &mut dyn FnMut(&Expr) -> Expr) -> Expr {
        let bx = |e: Expr| Box::new(e);
        match self {
            Expr::Const(_)
            | Expr::Ord
            | Expr::Num(_)
            | Expr::True
            | Expr::False
            | Expr::VertexEq(..)
            | Expr::Edge(..)
            | Expr::Label(..) => self.clone(),
            Expr::Add(a, b) => Expr::Add(bx(f(a)), bx(f(b))),
            Expr::Mul(a, b) => Expr::Mul(bx(f(a)), bx(f(b))),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, bx(f(a)), bx(f(b))),
            Expr::And(a, b) => Expr::And(bx(f(a)), bx(f(b))),
            Expr::Or(a, b) => Expr::Or(bx(f(a)), bx(f(b))),
            Expr::Not(a) => Expr::Not(bx(f(a))),
            Expr::Count(b) => Expr::Count(b.map(f)),
            Expr::Exists(b) => Expr::Exists(b.map(f)),
            Expr::CountQuant { threshold, var, body } => {
                Expr::CountQuant { threshold: *threshold, var: *var, body: bx(f(body)) }
            }
            Expr::Builtin { name, args } => Expr::Builtin { name: name.clone(), args: args.iter().map(|a| f(a)).collect() },
            Expr::ModRepr { index, bit, bound, modulus, result } => Expr::ModRepr {
                index: *index,
                bit: bx(f(bit)),
                bound: bx(f(bound)),
                modulus: bx(f(modulus)),
                result: bx(f(result)),
            },
        }
    }

    pub fn free_vertex_vars(&self) -> BTreeSet<VVar> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &mut BTreeSet::new());
        out
    }

    pub fn free_number_vars(&self) -> BTreeSet<NVar> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_free(&self, vv: &mut BTreeSet<VVar>, nv: &mut BTreeSet<NVar>) {
        match self {
            Expr::Num(y) => {
                nv.insert(*y);
            }
            Expr::VertexEq(a, b) | Expr::Edge(a, b) => {
                vv.insert(*a);
                vv.insert(*b);
            }
            Expr::Label(_, x) => {
                vv.insert(*x);
            }
            Expr::Count(b) | Expr::Exists(b) => {
                let (mut bv, mut bn) = (BTreeSet::new(), BTreeSet::new());
                b.body.collect_free(&mut bv, &mut bn);
                for (y, _) in b.numbers.iter().rev() {
                    bn.remove(y);
                }
                // bounds may use vertex binders and earlier number binders
                for (j, (_, t)) in b.numbers.iter().enumerate() {
                    let (mut tv, mut tn) = (BTreeSet::new(), BTreeSet::new());
                    t.collect_free(&mut tv, &mut tn);
                    for (y, _) in &b.numbers[..j] {
                        tn.remove(y);
                    }
                    bv.extend(tv);
                    bn.extend(tn);
                }
                for x in &b.vertex {
                    bv.remove(x);
                }
                vv.extend(bv);
                nv.extend(bn);
            }
            Expr::CountQuant { var, body, .. } => {
                let mut bv = BTreeSet::new();
                body.collect_free(&mut bv, nv);
                bv.remove(var);
                vv.extend(bv);
            }
            Expr::ModRepr { index, bit, bound, modulus, result } => {
                let mut bn = BTreeSet::new();
                bit.collect_free(vv, &mut bn);
                bn.remove(index);
                nv.extend(bn);
                bound.collect_free(vv, nv);
                modulus.collect_free(vv, nv);
                result.collect_free(vv, nv);
            }
            _ => {
                for c in self.children() {
                    c.collect_free(vv, nv);
                }
            }
        }
    }

    /// Every vertex variable occurring anywhere, bound or free.
    pub fn all_vertex_vars(&self) -> BTreeSet<VVar> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::VertexEq(a, b) | Expr::Edge(a, b) => {
                out.insert(*a);
                out.insert(*b);
            }
            Expr::Label(_, x) => {
                out.insert(*x);
            }
            Expr::Count(b) | Expr::Exists(b) => out.extend(b.vertex.iter().copied()),
            Expr::CountQuant { var, .. } => {
                out.insert(*var);
            }
            _ => {}
        });
        out
    }

    /// Every number variable occurring anywhere, bound or free.
    pub fn all_number_vars(&self) -> BTreeSet<NVar> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::Num(y) => {
                out.insert(*y);
            }
            Expr::Count(b) | Expr::Exists(b) => out.extend(b.numbers.iter().map(|(y, _)| *y)),
            Expr::ModRepr { index, .. } => {
                out.insert(*index);
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Renames free occurrences of vertex variables. Binders are left alone;
    /// callers avoid capture by choosing targets not bound inside `self`.
    pub fn rename_vertex(&self, map: &dyn Fn(VVar) -> VVar) -> Expr {
        self.rename_vertex_scoped(map, &BTreeSet::new())
    }

    fn rename_vertex_scoped(&self, map: &dyn Fn(VVar) -> VVar, bound: &BTreeSet<VVar>) -> Expr {
        let m = |x: VVar| if bound.contains(&x) { x } else { map(x) };
        match self {
            Expr::VertexEq(a, b) => Expr::VertexEq(m(*a), m(*b)),
            Expr::Edge(a, b) => Expr::Edge(m(*a), m(*b)),
            Expr::Label(k, x) => Expr::Label(*k, m(*x)),
            Expr::Count(b) | Expr::Exists(b) => {
                let mut inner = bound.clone();
                inner.extend(b.vertex.iter().copied());
                let nb = b.map(&mut |e| e.rename_vertex_scoped(map, &inner));
                if matches!(self, Expr::Count(_)) {
                    Expr::Count(nb)
                } else {
                    Expr::Exists(nb)
                }
            }
            Expr::CountQuant { threshold, var, body } => {
                let mut inner = bound.clone();
                inner.insert(*var);
                Expr::CountQuant {
                    threshold: *threshold,
                    var: *var,
                    body: Box::new(body.rename_vertex_scoped(map, &inner)),
                }
            }
            _ => self.map_children(&mut |c| c.rename_vertex_scoped(map, bound)),
        }
    }

    /// Replaces free occurrences of number variable `y` by `t`. Assumes the
    /// free variables of `t` are not captured inside `self`.
    pub fn subst_number(&self, y: NVar, t: &Expr) -> Expr {
        match self {
            Expr::Num(z) if *z == y => t.clone(),
            Expr::Count(b) | Expr::Exists(b) => {
                let mut shadowed = false;
                let mut numbers = Vec::with_capacity(b.numbers.len());
                for (z, bound) in &b.numbers {
                    let nb = if shadowed { bound.clone() } else { bound.subst_number(y, t) };
                    numbers.push((*z, nb));
                    if *z == y {
                        shadowed = true;
                    }
                }
                let body = if shadowed { (*b.body).clone() } else { b.body.subst_number(y, t) };
                let nb = Binder { vertex: b.vertex.clone(), numbers, body: Box::new(body) };
                if matches!(self, Expr::Count(_)) {
                    Expr::Count(nb)
                } else {
                    Expr::Exists(nb)
                }
            }
            Expr::ModRepr { index, bit, bound, modulus, result } => Expr::ModRepr {
                index: *index,
                bit: Box::new(if *index == y { (**bit).clone() } else { bit.subst_number(y, t) }),
                bound: Box::new(bound.subst_number(y, t)),
                modulus: Box::new(modulus.subst_number(y, t)),
                result: Box::new(result.subst_number(y, t)),
            },
            _ => self.map_children(&mut |c| c.subst_number(y, t)),
        }
    }

    /// Replaces every occurrence of the subterm `from` by `to`, without
    /// descending into binders that bind a free variable of `from`.
    pub fn replace_subterm(&self, from: &Expr, to: &Expr) -> Expr {
        if self == from {
            return to.clone();
        }
        let fv = from.free_vertex_vars();
        let fn_ = from.free_number_vars();
        let blocks = match self {
            Expr::Count(b) | Expr::Exists(b) => {
                b.vertex.iter().any(|x| fv.contains(x)) || b.numbers.iter().any(|(y, _)| fn_.contains(y))
            }
            Expr::CountQuant { var, .. } => fv.contains(var),
            _ => false,
        };
        if blocks {
            return self.clone();
        }
        self.map_children(&mut |c| c.replace_subterm(from, to))
    }

    /// Rewrites `exists^{>=n} x . f` as `n <= #x.f`.
    pub fn desugar_count_quant(&self) -> Expr {
        match self {
            Expr::CountQuant { threshold, var, body } => Expr::le(
                Expr::Const(*threshold),
                Expr::count(vec_of(*var), Vec::new(), body.desugar_count_quant()),
            ),
            _ => self.map_children(&mut |c| c.desugar_count_quant()),
        }
    }
}

impl Binder {
    pub fn map(&self, f: &mut dyn FnMut(&Expr) -> Expr) -> Binder {
        Binder {
            vertex: self.vertex.clone(),
            numbers: self.numbers.iter().map(|(y, t)| (*y, f(t))).collect(),
            body: Box::new(f(&self.body)),
        }
    }
}

fn vec_of(x: VVar) -> Vec<VVar> {
    let mut v = Vec::with_capacity(1);
    v.push(x);
    v
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("formula uses vertex variable x{0}; swapping needs only x1 and x2")]
pub struct SwapError(pub VVar);

/// Exchanges `x1` and `x2` everywhere, binders included.
pub fn swap_vertex_variables(e: &Expr) -> Result<Expr, SwapError> {
    if let Some(&x) = e.all_vertex_vars().iter().find(|&&x| x != 1 && x != 2) {
        return Err(SwapError(x));
    }
    Ok(swap_all(e))
}

fn swap_all(e: &Expr) -> Expr {
    let s = |x: VVar| 3 - x;
    match e {
        Expr::VertexEq(a, b) => Expr::VertexEq(s(*a), s(*b)),
        Expr::Edge(a, b) => Expr::Edge(s(*a), s(*b)),
        Expr::Label(k, x) => Expr::Label(*k, s(*x)),
        Expr::Count(b) | Expr::Exists(b) => {
            let mut nb = b.map(&mut swap_all);
            nb.vertex = b.vertex.iter().map(|&x| s(x)).collect();
            if matches!(e, Expr::Count(_)) {
                Expr::Count(nb)
            } else {
                Expr::Exists(nb)
            }
        }
        Expr::CountQuant { threshold, var, body } => {
            Expr::CountQuant { threshold: *threshold, var: s(*var), body: Box::new(swap_all(body)) }
        }
        _ => e.map_children(&mut swap_all),
    }
}
