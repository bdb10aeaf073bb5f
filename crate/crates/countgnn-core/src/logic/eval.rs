//! Exact evaluation of expressions over a labelled graph.
//!
//! Expressions are compiled once into a hash-consed arena whose variables
//! live in dense slots; evaluation on a graph then memoises counting nodes
//! by their free-variable values. Two shortcuts keep nested number ranges
//! tractable without changing results:
//!
//! * a number binder `y` whose body has a top-level conjunct `y = t` (or a
//!   modular-representation atom with result `y`) only tries that value;
//!   a conjunct `y < t` or `y <= t` truncates the range;
//! * a vertex binder `x'` with a top-level conjunct `E(x,x')` only ranges
//!   over the neighbours of `x`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use super::ast::{Binder, CmpOp, Expr, NVar, VVar};
use super::builtins::{BuiltinFn, BuiltinRegistry};
use crate::graph::LabelledGraph;
use crate::nat::Nat;

const MEMO_LIMIT: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("vertex variable x{0} has no value")]
    UnboundVertex(VVar),
    #[error("number variable y{0} has no value")]
    UnboundNumber(NVar),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("builtin `{name}` takes {expected} arguments, found {found}")]
    BuiltinArity { name: String, expected: usize, found: usize },
    #[error("modulus evaluated to 0")]
    ZeroModulus,
    #[error("x{var} is assigned vertex {vertex}, but the graph has {order} vertices")]
    VertexOutOfRange { var: VVar, vertex: usize, order: usize },
    #[error("label P{label} used on a graph with {width} labels")]
    LabelOutOfRange { label: u32, width: usize },
    #[error("range of size {0} is too large to enumerate")]
    RangeTooLarge(String),
    #[error("{0}")]
    WrongProfile(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Num(Nat),
    Bool(bool),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Num(_) => None,
        }
    }

    pub fn as_nat(&self) -> Option<&Nat> {
        match self {
            Value::Num(n) => Some(n),
            Value::Bool(_) => None,
        }
    }
}

/// Assignment of vertices and naturals to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation {
    pub vertex: BTreeMap<VVar, usize>,
    pub number: BTreeMap<NVar, Nat>,
}

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vertex(mut self, x: VVar, v: usize) -> Self {
        self.vertex.insert(x, v);
        self
    }

    pub fn with_number(mut self, y: NVar, n: impl Into<Nat>) -> Self {
        self.number.insert(y, n.into());
        self
    }
}

type Id = u32;
type Slot = usize;

#[derive(Debug, Clone)]
enum VDom {
    All,
    Neighbours(Slot),
    Equal(Slot),
}

#[derive(Debug, Clone)]
enum NDom {
    Range,
    Witness(Id),
    WitnessMod(Id),
    Upper(Id, bool),
}

#[derive(Debug, Clone)]
enum Kind {
    Count,
    AtLeast(u64),
}

#[derive(Debug, Clone, Default)]
struct KeySlots {
    v: Vec<Slot>,
    n: Vec<Slot>,
}

#[derive(Debug, Clone)]
struct Quant {
    vslots: Vec<Slot>,
    vdom: Vec<VDom>,
    nums: Vec<(Slot, Id, NDom)>,
    body: Id,
    kind: Kind,
    key: KeySlots,
}

#[derive(Debug, Clone)]
enum Node {
    Const(Nat),
    Ord,
    Num(Slot),
    Add(Id, Id),
    Mul(Id, Id),
    Quant(Quant),
    True,
    False,
    VertexEq(Slot, Slot),
    Edge(Slot, Slot),
    Label(usize, Slot),
    Cmp(CmpOp, Id, Id),
    Not(Id),
    And(Id, Id),
    Or(Id, Id),
    Builtin(BuiltinFn, Vec<Id>),
    ModRepr { index: Slot, bit: Id, bound: Id, modulus: Id, result: Id, key: KeySlots },
}

/// A graph-independent compiled expression.
#[derive(Debug, Clone)]
pub struct CompiledFormula {
    nodes: Vec<Node>,
    root: Id,
    is_term: bool,
    vslot: BTreeMap<VVar, Slot>,
    nslot: BTreeMap<NVar, Slot>,
    free_vertex: Vec<VVar>,
    free_number: Vec<NVar>,
    max_label: u32,
}

struct Compiler<'r> {
    reg: &'r BuiltinRegistry,
    nodes: Vec<Node>,
    interned: HashMap<Expr, Id>,
    vslot: BTreeMap<VVar, Slot>,
    nslot: BTreeMap<NVar, Slot>,
    max_label: u32,
}

impl Compiler<'_> {
    fn v(&mut self, x: VVar) -> Slot {
        let next = self.vslot.len();
        *self.vslot.entry(x).or_insert(next)
    }

    fn n(&mut self, y: NVar) -> Slot {
        let next = self.nslot.len();
        *self.nslot.entry(y).or_insert(next)
    }

    fn key(&mut self, e: &Expr) -> KeySlots {
        let v = e.free_vertex_vars().into_iter().map(|x| self.v(x)).collect();
        let n = e.free_number_vars().into_iter().map(|y| self.n(y)).collect();
        KeySlots { v, n }
    }

    fn compile(&mut self, e: &Expr) -> Result<Id, EvalError> {
        if let Some(&id) = self.interned.get(e) {
            return Ok(id);
        }
        let node = match e {
            Expr::Const(c) => Node::Const(Nat::from(*c)),
            Expr::Ord => Node::Ord,
            Expr::Num(y) => Node::Num(self.n(*y)),
            Expr::Add(a, b) => Node::Add(self.compile(a)?, self.compile(b)?),
            Expr::Mul(a, b) => Node::Mul(self.compile(a)?, self.compile(b)?),
            Expr::Count(b) => Node::Quant(self.quant(b, Kind::Count, e)?),
            Expr::Exists(b) => Node::Quant(self.quant(b, Kind::AtLeast(1), e)?),
            Expr::CountQuant { threshold, var, body } => {
                let b = Binder { vertex: vec![*var], numbers: Vec::new(), body: body.clone() };
                Node::Quant(self.quant(&b, Kind::AtLeast(*threshold), e)?)
            }
            Expr::True => Node::True,
            Expr::False => Node::False,
            Expr::VertexEq(a, b) => Node::VertexEq(self.v(*a), self.v(*b)),
            Expr::Edge(a, b) => Node::Edge(self.v(*a), self.v(*b)),
            Expr::Label(k, x) => {
                self.max_label = self.max_label.max(*k);
                Node::Label((*k - 1) as usize, self.v(*x))
            }
            Expr::Cmp(op, a, b) => Node::Cmp(*op, self.compile(a)?, self.compile(b)?),
            Expr::Not(a) => Node::Not(self.compile(a)?),
            Expr::And(a, b) => Node::And(self.compile(a)?, self.compile(b)?),
            Expr::Or(a, b) => Node::Or(self.compile(a)?, self.compile(b)?),
            Expr::Builtin { name, args } => {
                let b = self.reg.get(name).ok_or_else(|| EvalError::UnknownBuiltin(name.clone()))?;
                if b.arity != args.len() {
                    return Err(EvalError::BuiltinArity { name: name.clone(), expected: b.arity, found: args.len() });
                }
                let ids = args.iter().map(|a| self.compile(a)).collect::<Result<Vec<_>, _>>()?;
                Node::Builtin(b.func, ids)
            }
            Expr::ModRepr { index, bit, bound, modulus, result } => {
                // the memo key covers everything except the result term
                let core = Expr::ModRepr {
                    index: *index,
                    bit: bit.clone(),
                    bound: bound.clone(),
                    modulus: modulus.clone(),
                    result: alloc::boxed::Box::new(Expr::Const(0)),
                };
                let key = self.key(&core);
                Node::ModRepr {
                    index: self.n(*index),
                    bit: self.compile(bit)?,
                    bound: self.compile(bound)?,
                    modulus: self.compile(modulus)?,
                    result: self.compile(result)?,
                    key,
                }
            }
        };
        let id = self.nodes.len() as Id;
        self.nodes.push(node);
        self.interned.insert(e.clone(), id);
        Ok(id)
    }

    fn quant(&mut self, b: &Binder, kind: Kind, whole: &Expr) -> Result<Quant, EvalError> {
        let conj = b.body.conjuncts();
        let mut vdom = Vec::with_capacity(b.vertex.len());
        for (i, &x) in b.vertex.iter().enumerate() {
            let later = &b.vertex[i..];
            let usable = |a: VVar| a != x && !later.contains(&a);
            let mut dom = VDom::All;
            for c in &conj {
                match **c {
                    Expr::Edge(a, z) | Expr::Edge(z, a) if z == x && usable(a) => {
                        dom = VDom::Neighbours(self.v(a));
                        break;
                    }
                    _ => {}
                }
            }
            if matches!(dom, VDom::All) {
                for c in &conj {
                    match **c {
                        Expr::VertexEq(a, z) | Expr::VertexEq(z, a) if z == x && usable(a) => {
                            dom = VDom::Equal(self.v(a));
                            break;
                        }
                        _ => {}
                    }
                }
            }
            vdom.push(dom);
        }
        let mut nums = Vec::with_capacity(b.numbers.len());
        for (j, (y, bound)) in b.numbers.iter().enumerate() {
            let blocked: Vec<NVar> = b.numbers[j..].iter().map(|(z, _)| *z).collect();
            let ok = |t: &Expr| t.free_number_vars().iter().all(|z| !blocked.contains(z));
            let mut dom = NDom::Range;
            let mut upper = None;
            for c in &conj {
                match c {
                    Expr::Cmp(CmpOp::Eq, l, r) if **l == Expr::Num(*y) && ok(r) => {
                        dom = NDom::Witness(self.compile(r)?);
                        break;
                    }
                    Expr::Cmp(CmpOp::Eq, l, r) if **r == Expr::Num(*y) && ok(l) => {
                        dom = NDom::Witness(self.compile(l)?);
                        break;
                    }
                    Expr::ModRepr { result, .. } if **result == Expr::Num(*y) => {
                        let mut stripped = (*c).clone();
                        if let Expr::ModRepr { result, .. } = &mut stripped {
                            **result = Expr::Const(0);
                        }
                        if ok(&stripped) {
                            dom = NDom::WitnessMod(self.compile(c)?);
                            break;
                        }
                    }
                    Expr::Cmp(op @ (CmpOp::Lt | CmpOp::Le), l, r)
                        if upper.is_none() && **l == Expr::Num(*y) && ok(r) =>
                    {
                        upper = Some((self.compile(r)?, *op == CmpOp::Le));
                    }
                    _ => {}
                }
            }
            if let (NDom::Range, Some((t, incl))) = (&dom, upper) {
                dom = NDom::Upper(t, incl);
            }
            let bound_id = self.compile(bound)?;
            nums.push((self.n(*y), bound_id, dom));
        }
        let vslots = b.vertex.iter().map(|&x| self.v(x)).collect();
        let body = self.compile(&b.body)?;
        let key = self.key(whole);
        Ok(Quant { vslots, vdom, nums, body, kind, key })
    }
}

impl CompiledFormula {
    pub fn compile(e: &Expr, reg: &BuiltinRegistry) -> Result<Self, EvalError> {
        let mut c = Compiler {
            reg,
            nodes: Vec::new(),
            interned: HashMap::new(),
            vslot: BTreeMap::new(),
            nslot: BTreeMap::new(),
            max_label: 0,
        };
        let root = c.compile(e)?;
        Ok(CompiledFormula {
            nodes: c.nodes,
            root,
            is_term: e.is_term(),
            vslot: c.vslot,
            nslot: c.nslot,
            free_vertex: e.free_vertex_vars().into_iter().collect(),
            free_number: e.free_number_vars().into_iter().collect(),
            max_label: c.max_label,
        })
    }

    pub fn free_vertex_vars(&self) -> &[VVar] {
        &self.free_vertex
    }

    pub fn free_number_vars(&self) -> &[NVar] {
        &self.free_number
    }

    pub fn is_term(&self) -> bool {
        self.is_term
    }

    pub fn evaluator<'a>(&'a self, g: &'a LabelledGraph) -> Result<Evaluator<'a>, EvalError> {
        if self.max_label as usize > g.label_width() {
            return Err(EvalError::LabelOutOfRange { label: self.max_label, width: g.label_width() });
        }
        Ok(Evaluator {
            f: self,
            g,
            venv: vec![usize::MAX; self.vslot.len()],
            nenv: vec![Nat::ZERO; self.nslot.len()],
            maxima: vec![None; self.nslot.len()],
            memo: HashMap::new(),
        })
    }
}

/// Evaluation state for one compiled expression on one graph.
pub struct Evaluator<'a> {
    f: &'a CompiledFormula,
    g: &'a LabelledGraph,
    venv: Vec<usize>,
    nenv: Vec<Nat>,
    maxima: Vec<Option<Nat>>,
    memo: HashMap<(Id, Vec<Nat>), Nat>,
}

impl<'a> Evaluator<'a> {
    pub fn eval(&mut self, val: &Valuation) -> Result<Value, EvalError> {
        for &x in &self.f.free_vertex {
            let v = *val.vertex.get(&x).ok_or(EvalError::UnboundVertex(x))?;
            if v >= self.g.order() {
                return Err(EvalError::VertexOutOfRange { var: x, vertex: v, order: self.g.order() });
            }
            self.venv[self.f.vslot[&x]] = v;
        }
        for &y in &self.f.free_number {
            let n = val.number.get(&y).ok_or(EvalError::UnboundNumber(y))?;
            self.nenv[self.f.nslot[&y]] = n.clone();
        }
        let root = self.f.root;
        if self.f.is_term {
            Ok(Value::Num(self.term(root)?))
        } else {
            Ok(Value::Bool(self.formula(root)?))
        }
    }

    pub fn eval_bool(&mut self, val: &Valuation) -> Result<bool, EvalError> {
        match self.eval(val)? {
            Value::Bool(b) => Ok(b),
            Value::Num(_) => Err(EvalError::WrongProfile("expected a formula, found a term".into())),
        }
    }

    /// Largest value each bound number variable has taken so far.
    pub fn observed_maxima(&self) -> BTreeMap<NVar, Nat> {
        self.f
            .nslot
            .iter()
            .filter_map(|(&y, &s)| self.maxima[s].clone().map(|m| (y, m)))
            .collect()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn node(&self, id: Id) -> &'a Node {
        &self.f.nodes[id as usize]
    }

    fn term(&mut self, id: Id) -> Result<Nat, EvalError> {
        match self.node(id) {
            Node::Const(c) => Ok(c.clone()),
            Node::Ord => Ok(Nat::from(self.g.order())),
            Node::Num(s) => Ok(self.nenv[*s].clone()),
            Node::Add(a, b) => Ok(self.term(*a)?.add(&self.term(*b)?)),
            Node::Mul(a, b) => Ok(self.term(*a)?.mul(&self.term(*b)?)),
            Node::Quant(q) => self.quant(id, q),
            _ => unreachable!("formula node in term position"),
        }
    }

    fn formula(&mut self, id: Id) -> Result<bool, EvalError> {
        match self.node(id) {
            Node::True => Ok(true),
            Node::False => Ok(false),
            Node::VertexEq(a, b) => Ok(self.venv[*a] == self.venv[*b]),
            Node::Edge(a, b) => Ok(self.g.has_edge(self.venv[*a], self.venv[*b])),
            Node::Label(k, x) => Ok(self.g.label(self.venv[*x], *k)),
            Node::Cmp(op, a, b) => {
                let (l, r) = (self.term(*a)?, self.term(*b)?);
                Ok(match op {
                    CmpOp::Le => l <= r,
                    CmpOp::Lt => l < r,
                    CmpOp::Eq => l == r,
                })
            }
            Node::Not(a) => Ok(!self.formula(*a)?),
            Node::And(a, b) => Ok(self.formula(*a)? && self.formula(*b)?),
            Node::Or(a, b) => Ok(self.formula(*a)? || self.formula(*b)?),
            Node::Quant(q) => Ok(!self.quant(id, q)?.is_zero()),
            Node::Builtin(f, args) => {
                let vals = args.iter().map(|&a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(f(&vals))
            }
            Node::ModRepr { result, .. } => {
                let acc = self.mod_value(id)?;
                Ok(self.term(*result)? == Nat::from(acc))
            }
            _ => unreachable!("term node in formula position"),
        }
    }

    fn key_of(&self, id: Id, k: &KeySlots) -> (Id, Vec<Nat>) {
        let mut key = Vec::with_capacity(k.v.len() + k.n.len());
        key.extend(k.v.iter().map(|&s| Nat::from(self.venv[s])));
        key.extend(k.n.iter().map(|&s| self.nenv[s].clone()));
        (id, key)
    }

    fn remember(&mut self, key: (Id, Vec<Nat>), value: Nat) {
        if self.memo.len() >= MEMO_LIMIT {
            self.memo.clear();
        }
        self.memo.insert(key, value);
    }

    fn quant(&mut self, id: Id, q: &'a Quant) -> Result<Nat, EvalError> {
        let key = self.key_of(id, &q.key);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let limit = match q.kind {
            Kind::Count => None,
            Kind::AtLeast(n) => Some(n),
        };
        let mut count = 0u64;
        let reached = if limit == Some(0) { true } else { self.enum_vertex(q, 0, &mut count, limit)? };
        let value = match q.kind {
            Kind::Count => Nat::from(count),
            Kind::AtLeast(_) => Nat::from(u64::from(reached)),
        };
        self.remember(key, value.clone());
        Ok(value)
    }

    fn enum_vertex(&mut self, q: &'a Quant, i: usize, count: &mut u64, limit: Option<u64>) -> Result<bool, EvalError> {
        if i == q.vslots.len() {
            return self.enum_number(q, 0, count, limit);
        }
        let slot = q.vslots[i];
        let saved = self.venv[slot];
        let g = self.g;
        let mut stop = false;
        match &q.vdom[i] {
            VDom::All => {
                for v in 0..g.order() {
                    self.venv[slot] = v;
                    if self.enum_vertex(q, i + 1, count, limit)? {
                        stop = true;
                        break;
                    }
                }
            }
            VDom::Neighbours(a) => {
                let u = self.venv[*a];
                for &v in g.neighbours(u) {
                    self.venv[slot] = v;
                    if self.enum_vertex(q, i + 1, count, limit)? {
                        stop = true;
                        break;
                    }
                }
            }
            VDom::Equal(a) => {
                self.venv[slot] = self.venv[*a];
                stop = self.enum_vertex(q, i + 1, count, limit)?;
            }
        }
        self.venv[slot] = saved;
        Ok(stop)
    }

    fn enum_number(&mut self, q: &'a Quant, j: usize, count: &mut u64, limit: Option<u64>) -> Result<bool, EvalError> {
        if j == q.nums.len() {
            if self.formula(q.body)? {
                *count += 1;
                if limit.is_some_and(|l| *count >= l) {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        let (slot, bound, dom) = &q.nums[j];
        let bound = self.term(*bound)?;
        let (lo, hi): (u64, u64) = match dom {
            NDom::Range => (0, small(&bound)?),
            NDom::Upper(t, incl) => {
                let mut u = self.term(*t)?;
                if *incl {
                    u = u.add(&Nat::ONE);
                }
                let top = if u < bound { u } else { bound };
                (0, small(&top)?)
            }
            NDom::Witness(t) => {
                let w = self.term(*t)?;
                match w.as_u64() {
                    Some(w) if w_below(&bound, w) => (w, w + 1),
                    _ => (0, 0),
                }
            }
            NDom::WitnessMod(m) => {
                let w = self.mod_value(*m)?;
                if w_below(&bound, w) {
                    (w, w + 1)
                } else {
                    (0, 0)
                }
            }
        };
        let saved = self.nenv[*slot].clone();
        let mut stop = false;
        for v in lo..hi {
            let value = Nat::from(v);
            if self.maxima[*slot].as_ref().is_none_or(|m| *m < value) {
                self.maxima[*slot] = Some(value.clone());
            }
            self.nenv[*slot] = value;
            if self.enum_number(q, j + 1, count, limit)? {
                stop = true;
                break;
            }
        }
        self.nenv[*slot] = saved;
        Ok(stop)
    }

    /// `(sum of 2^i over i < bound with bit(i)) mod modulus`, streamed.
    fn mod_value(&mut self, id: Id) -> Result<u64, EvalError> {
        let Node::ModRepr { index, bit, bound, modulus, key, .. } = self.node(id) else {
            unreachable!("not a modular representation node")
        };
        let k = self.key_of(id, key);
        if let Some(v) = self.memo.get(&k) {
            return Ok(v.as_u64().expect("residue fits a word"));
        }
        let b = self.term(*bound)?;
        let b = small(&b)?;
        let p = self.term(*modulus)?;
        let p = match p.as_u64() {
            Some(0) => return Err(EvalError::ZeroModulus),
            Some(p) => p,
            None => return Err(EvalError::RangeTooLarge(format!("modulus {p}"))),
        };
        let saved = self.nenv[*index].clone();
        let mut acc: u64 = 0;
        let mut pow: u64 = 1 % p;
        for i in 0..b {
            let value = Nat::from(i);
            if self.maxima[*index].as_ref().is_none_or(|m| *m < value) {
                self.maxima[*index] = Some(value.clone());
            }
            self.nenv[*index] = value;
            if self.formula(*bit)? {
                acc = ((acc as u128 + pow as u128) % p as u128) as u64;
            }
            pow = ((pow as u128 * 2) % p as u128) as u64;
        }
        self.nenv[*index] = saved;
        self.remember(k, Nat::from(acc));
        Ok(acc)
    }
}

fn small(n: &Nat) -> Result<u64, EvalError> {
    n.as_u64().ok_or_else(|| EvalError::RangeTooLarge(format!("{n}")))
}

fn w_below(bound: &Nat, w: u64) -> bool {
    Nat::from(w) < *bound
}

/// Evaluates `e` on `g` under `val`.
pub fn eval(g: &LabelledGraph, e: &Expr, val: &Valuation, reg: &BuiltinRegistry) -> Result<Value, EvalError> {
    let c = CompiledFormula::compile(e, reg)?;
    let mut ev = c.evaluator(g)?;
    ev.eval(val)
}

/// Vertices satisfying a formula with one free vertex variable and no free
/// number variables.
pub fn query_set(g: &LabelledGraph, e: &Expr, reg: &BuiltinRegistry) -> Result<Vec<usize>, EvalError> {
    let c = CompiledFormula::compile(e, reg)?;
    query_set_compiled(g, &c)
}

pub fn query_set_compiled(g: &LabelledGraph, c: &CompiledFormula) -> Result<Vec<usize>, EvalError> {
    if c.is_term() || c.free_vertex_vars().len() != 1 || !c.free_number_vars().is_empty() {
        return Err(EvalError::WrongProfile(
            "query needs a formula with exactly one free vertex variable and no free number variables".into(),
        ));
    }
    let x = c.free_vertex_vars()[0];
    let mut ev = c.evaluator(g)?;
    let mut out = Vec::new();
    for v in 0..g.order() {
        if ev.eval_bool(&Valuation::new().with_vertex(x, v))? {
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
