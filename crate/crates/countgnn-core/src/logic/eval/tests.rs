use super::*;
use crate::graph::{color_refinement, cycle, make_complete_bipartite, path, random_graph};
use crate::logic::parse::{parse_formula, parse_formula_with, parse_term, ParseOptions};
use alloc::boxed::Box;
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const Q1: &str = "exists x2 . E(x1,x2) & #(x1).(E(x2,x1) & x1 = x1) > #(x2).(E(x1,x2) & x2 = x2)";
const EVEN: &str = "exists (y0 < ord) . 2*y0 = #(x2).(E(x1,x2) & x2 = x2)";

fn reg() -> BuiltinRegistry {
    BuiltinRegistry::standard()
}

/// Reference semantics: plain recursion over the syntax tree, full ranges,
/// no memo and no shortcuts.
fn naive(g: &LabelledGraph, e: &Expr, vs: &mut BTreeMap<VVar, usize>, ns: &mut BTreeMap<NVar, BigUint>) -> Value {
    let t = |v: Value| match v {
        Value::Num(n) => n.to_big(),
        Value::Bool(_) => panic!("sort"),
    };
    let f = |v: Value| v.as_bool().expect("sort");
    match e {
        Expr::Const(c) => Value::Num(Nat::from(*c)),
        Expr::Ord => Value::Num(Nat::from(g.order())),
        Expr::Num(y) => Value::Num(Nat::from_big(ns[y].clone())),
        Expr::Add(a, b) => Value::Num(Nat::from_big(t(naive(g, a, vs, ns)) + t(naive(g, b, vs, ns)))),
        Expr::Mul(a, b) => Value::Num(Nat::from_big(t(naive(g, a, vs, ns)) * t(naive(g, b, vs, ns)))),
        Expr::Count(b) | Expr::Exists(b) => {
            let c = naive_count(g, b, 0, vs, ns);
            if matches!(e, Expr::Count(_)) {
                Value::Num(Nat::from(c))
            } else {
                Value::Bool(c > 0)
            }
        }
        Expr::CountQuant { threshold, var, body } => {
            let saved = vs.get(var).copied();
            let mut c = 0u64;
            for v in 0..g.order() {
                vs.insert(*var, v);
                c += u64::from(f(naive(g, body, vs, ns)));
            }
            restore(vs, *var, saved);
            Value::Bool(c >= *threshold)
        }
        Expr::True => Value::Bool(true),
        Expr::False => Value::Bool(false),
        Expr::VertexEq(a, b) => Value::Bool(vs[a] == vs[b]),
        Expr::Edge(a, b) => Value::Bool(g.has_edge(vs[a], vs[b])),
        Expr::Label(k, x) => Value::Bool(g.label(vs[x], *k as usize - 1)),
        Expr::Cmp(op, a, b) => {
            let (l, r) = (t(naive(g, a, vs, ns)), t(naive(g, b, vs, ns)));
            Value::Bool(match op {
                CmpOp::Le => l <= r,
                CmpOp::Lt => l < r,
                CmpOp::Eq => l == r,
            })
        }
        Expr::Not(a) => Value::Bool(!f(naive(g, a, vs, ns))),
        Expr::And(a, b) => Value::Bool(f(naive(g, a, vs, ns)) & f(naive(g, b, vs, ns))),
        Expr::Or(a, b) => Value::Bool(f(naive(g, a, vs, ns)) | f(naive(g, b, vs, ns))),
        Expr::Builtin { name, args } => {
            let vals: Vec<Nat> = args.iter().map(|a| Nat::from_big(t(naive(g, a, vs, ns)))).collect();
            Value::Bool((reg().get(name).unwrap().func)(&vals))
        }
        Expr::ModRepr { index, bit, bound, modulus, result } => {
            let bound = t(naive(g, bound, vs, ns));
            let p = t(naive(g, modulus, vs, ns));
            let saved = ns.get(index).cloned();
            let mut total = BigUint::from(0u32);
            let mut i = BigUint::from(0u32);
            while i < bound {
                ns.insert(*index, i.clone());
                if f(naive(g, bit, vs, ns)) {
                    total += BigUint::from(1u32) << u64::try_from(&i).unwrap();
                }
                i += 1u32;
            }
            match saved {
                Some(s) => ns.insert(*index, s),
                None => ns.remove(index),
            };
            Value::Bool(t(naive(g, result, vs, ns)) == total % p)
        }
    }
}

fn restore(vs: &mut BTreeMap<VVar, usize>, x: VVar, saved: Option<usize>) {
    match saved {
        Some(s) => vs.insert(x, s),
        None => vs.remove(&x),
    };
}

fn naive_count(g: &LabelledGraph, b: &Binder, i: usize, vs: &mut BTreeMap<VVar, usize>, ns: &mut BTreeMap<NVar, BigUint>) -> u64 {
    if i < b.vertex.len() {
        let x = b.vertex[i];
        let saved = vs.get(&x).copied();
        let mut c = 0;
        for v in 0..g.order() {
            vs.insert(x, v);
            c += naive_count(g, b, i + 1, vs, ns);
        }
        restore(vs, x, saved);
        return c;
    }
    let j = i - b.vertex.len();
    if j == b.numbers.len() {
        return u64::from(naive(g, &b.body, vs, ns).as_bool().unwrap());
    }
    let (y, bound) = &b.numbers[j];
    let top = match naive(g, bound, vs, ns) {
        Value::Num(n) => n.as_u64().unwrap(),
        Value::Bool(_) => panic!("sort"),
    };
    let saved = ns.get(y).cloned();
    let mut c = 0;
    for v in 0..top {
        ns.insert(*y, BigUint::from(v));
        c += naive_count(g, b, i + 1, vs, ns);
    }
    match saved {
        Some(s) => ns.insert(*y, s),
        None => ns.remove(y),
    };
    c
}

#[test]
fn degree_on_complete_bipartite() {
    let g = make_complete_bipartite(2, 3);
    let deg = parse_term("#(x2).(E(x1,x2))").unwrap();
    let c = CompiledFormula::compile(&deg, &reg()).unwrap();
    let mut ev = c.evaluator(&g).unwrap();
    let at = |ev: &mut Evaluator, v| ev.eval(&Valuation::new().with_vertex(1, v)).unwrap();
    assert_eq!(at(&mut ev, 0), Value::Num(Nat::from(3u64)));
    assert_eq!(at(&mut ev, 1), Value::Num(Nat::from(3u64)));
    assert_eq!(at(&mut ev, 4), Value::Num(Nat::from(2u64)));
}

#[test]
fn even_degree() {
    let f = parse_formula(EVEN).unwrap();
    assert_eq!(query_set(&cycle(4), &f, &reg()).unwrap(), vec![0, 1, 2, 3]);
    assert_eq!(query_set(&path(3), &f, &reg()).unwrap(), vec![1]);
}

#[test]
fn larger_degree_neighbour() {
    let f = parse_formula(Q1).unwrap();
    // |U| = 2 has degree 3, so the V side has the larger-degree neighbours
    assert_eq!(query_set(&make_complete_bipartite(2, 3), &f, &reg()).unwrap(), vec![2, 3, 4]);
    assert_eq!(query_set(&make_complete_bipartite(4, 3), &f, &reg()).unwrap(), vec![0, 1, 2, 3]);
    assert!(query_set(&make_complete_bipartite(3, 3), &f, &reg()).unwrap().is_empty());
    // star: centre has the larger degree, leaves are selected
    assert_eq!(query_set(&make_complete_bipartite(1, 3), &f, &reg()).unwrap(), vec![1, 2, 3]);
}

#[test]
fn modular_representation() {
    let g = cycle(4);
    let f = parse_formula("modrepr(y1; y1 < 3; ord; 5; 2)").unwrap();
    assert_eq!(eval(&g, &f, &Valuation::new(), &reg()).unwrap(), Value::Bool(true));
    let f = parse_formula("exists (y2 < ord) . modrepr(y1; y1 < 3; ord; 5; y2) & y2 = 2").unwrap();
    assert_eq!(eval(&g, &f, &Valuation::new(), &reg()).unwrap(), Value::Bool(true));
    let zero = parse_formula("modrepr(y1; y1 < 3; ord; 0; 2)").unwrap();
    assert_eq!(eval(&g, &zero, &Valuation::new(), &reg()), Err(EvalError::ZeroModulus));
}

#[test]
fn large_modulus_residues() {
    // bits at every even index below 40, modulo a prime above 2^32
    let g = cycle(40);
    let p: u64 = 4_294_967_311;
    let expected: u64 = ((0..40).step_by(2).map(|i| 1u128 << i).sum::<u128>() % p as u128) as u64;
    let f = parse_formula_with(
        &alloc::format!("modrepr(y1; builtin even(y1); ord; {p}; y2)"),
        &ParseOptions::general(),
    )
    .unwrap();
    let val = Valuation::new().with_number(2, expected);
    assert_eq!(eval(&g, &f, &val, &reg()).unwrap(), Value::Bool(true));
}

#[test]
fn errors() {
    let g = cycle(3);
    let f = parse_formula_with("builtin nope(y1)", &ParseOptions::general()).unwrap();
    assert_eq!(eval(&g, &f, &Valuation::new(), &reg()), Err(EvalError::UnknownBuiltin("nope".into())));
    let f = parse_formula_with("builtin prime(y1, y1)", &ParseOptions::general()).unwrap();
    assert!(matches!(eval(&g, &f, &Valuation::new(), &reg()), Err(EvalError::BuiltinArity { .. })));
    let f = parse_formula("P3(x1)").unwrap();
    assert!(matches!(eval(&g, &f, &Valuation::new(), &reg()), Err(EvalError::LabelOutOfRange { .. })));
    let f = parse_formula("y1 = 1").unwrap();
    assert_eq!(eval(&g, &f, &Valuation::new(), &reg()), Err(EvalError::UnboundNumber(1)));
    assert!(matches!(query_set(&g, &f, &reg()), Err(EvalError::WrongProfile(_))));
    let f = parse_formula("x1 = x1").unwrap();
    assert!(matches!(
        eval(&g, &f, &Valuation::new().with_vertex(1, 9), &reg()),
        Err(EvalError::VertexOutOfRange { .. })
    ));
    let huge = parse_formula("exists (y1 < ord^30) . y1 = y1").unwrap();
    assert!(matches!(eval(&cycle(5), &huge, &Valuation::new(), &reg()), Err(EvalError::RangeTooLarge(_))));
}

#[test]
fn witnesses_make_large_ranges_cheap() {
    // y ranges below ord^6 = 10^12, but the conjunct y = #(...) pins it
    let f = parse_formula("exists (y0 < ord^6) . y0 = #(x2).(E(x1,x2)) & y0 = 2").unwrap();
    assert_eq!(query_set(&cycle(10), &f, &reg()).unwrap().len(), 10);
    let f = parse_formula("exists (y0 < ord^6) . y0 < 3 & y0 + 1 = #(x2).(E(x1,x2))").unwrap();
    assert_eq!(query_set(&cycle(10), &f, &reg()).unwrap().len(), 10);
}

#[test]
fn observed_maxima_track_bound_variables() {
    let f = parse_formula(EVEN).unwrap();
    let c = CompiledFormula::compile(&f, &reg()).unwrap();
    let g = cycle(5);
    let mut ev = c.evaluator(&g).unwrap();
    ev.eval(&Valuation::new().with_vertex(1, 0)).unwrap();
    assert_eq!(ev.observed_maxima()[&0], Nat::from(1u64));
}

fn arb_term(depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![(0u64..4).prop_map(Expr::Const), Just(Expr::Ord), (0u32..2).prop_map(Expr::Num)];
    if depth == 0 {
        return leaf.boxed();
    }
    prop_oneof![
        leaf,
        (arb_term(depth - 1), arb_term(depth - 1)).prop_map(|(a, b)| Expr::add(a, b)),
        (arb_term(depth - 1), arb_term(depth - 1)).prop_map(|(a, b)| Expr::mul(a, b)),
        (1u32..3, arb_formula(depth - 1)).prop_map(|(x, b)| Expr::count(vec![x], Vec::new(), b)),
        (1u32..3, 2u32..4, arb_formula(depth - 1)).prop_map(|(x, y, b)| Expr::count(
            vec![x],
            vec![(y, Expr::Ord)],
            b
        )),
    ]
    .boxed()
}

fn arb_formula(depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        Just(Expr::True),
        (1u32..3, 1u32..3).prop_map(|(a, b)| Expr::VertexEq(a, b)),
        Just(Expr::Edge(1, 2)),
        Just(Expr::Edge(2, 1)),
        (1u32..3, 1u32..3).prop_map(|(k, x)| Expr::Label(k, x)),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let d = depth - 1;
    prop_oneof![
        leaf,
        (arb_term(d), arb_term(d), 0..3)
            .prop_map(|(a, b, k)| Expr::cmp([CmpOp::Le, CmpOp::Lt, CmpOp::Eq][k as usize], a, b)),
        arb_formula(d).prop_map(Expr::not),
        (arb_formula(d), arb_formula(d)).prop_map(|(a, b)| Expr::and(a, b)),
        (arb_formula(d), arb_formula(d)).prop_map(|(a, b)| Expr::or(a, b)),
        (1u32..3, arb_formula(d)).prop_map(|(x, b)| Expr::exists(vec![x], Vec::new(), b)),
        (1u32..3, arb_formula(d)).prop_map(|(x, b)| Expr::exists(vec![x], Vec::new(), Expr::and(Expr::Edge(if x == 1 { 2 } else { 1 }, x), b))),
        (2u32..4, arb_term(d), arb_formula(d)).prop_map(|(y, t, b)| Expr::exists(
            Vec::new(),
            vec![(y, Expr::Ord)],
            Expr::and(Expr::eq(Expr::Num(y), t), b)
        )),
        (2u32..4, arb_term(d), arb_formula(d)).prop_map(|(y, t, b)| Expr::exists(
            Vec::new(),
            vec![(y, Expr::add(Expr::Ord, Expr::Const(1)))],
            Expr::and(Expr::lt(Expr::Num(y), t), b)
        )),
        (1u64..4, 1u32..3, arb_formula(d))
            .prop_map(|(n, x, b)| Expr::CountQuant { threshold: n, var: x, body: Box::new(b) }),
        (4u32..5, arb_formula(d), 2u64..7, arb_term(d)).prop_map(|(i, bit, p, r)| Expr::ModRepr {
            index: i,
            bit: Box::new(bit),
            bound: Box::new(Expr::Ord),
            modulus: Box::new(Expr::Const(p)),
            result: Box::new(r),
        }),
    ]
    .boxed()
}

fn arb_graph() -> impl Strategy<Value = LabelledGraph> {
    (1usize..6, any::<u64>()).prop_map(|(n, seed)| random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, 2, 0.5))
}

fn full_valuation(g: &LabelledGraph, a: usize, b: usize, y0: u64, y1: u64) -> Valuation {
    let n = g.order();
    Valuation::new().with_vertex(1, a % n).with_vertex(2, b % n).with_number(0, y0).with_number(1, y1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_reference(e in arb_formula(3), g in arb_graph(), a in 0usize..6, b in 0usize..6, y0 in 0u64..5, y1 in 0u64..5) {
        let val = full_valuation(&g, a, b, y0, y1);
        let mut vs = val.vertex.clone();
        let mut ns: BTreeMap<NVar, BigUint> = val.number.iter().map(|(k, v)| (*k, v.to_big())).collect();
        let expected = naive(&g, &e, &mut vs, &mut ns);
        prop_assert_eq!(eval(&g, &e, &val, &reg()).unwrap(), expected);
    }

    #[test]
    fn count_quantifiers_match_their_desugaring(e in arb_formula(3), g in arb_graph(), a in 0usize..6, b in 0usize..6) {
        let val = full_valuation(&g, a, b, 1, 2);
        prop_assert_eq!(
            eval(&g, &e, &val, &reg()).unwrap(),
            eval(&g, &e.desugar_count_quant(), &val, &reg()).unwrap()
        );
    }

    #[test]
    fn invariant_under_isomorphism(e in arb_formula(3), g in arb_graph(), a in 0usize..6, b in 0usize..6, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..g.order()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let h = g.permute(&perm);
        let val = full_valuation(&g, a, b, 1, 3);
        let moved = full_valuation(&h, perm[a % g.order()], perm[b % g.order()], 1, 3);
        prop_assert_eq!(eval(&g, &e, &val, &reg()).unwrap(), eval(&h, &e, &moved, &reg()).unwrap());
    }

    #[test]
    fn guarded_queries_respect_refinement(e in arb_formula(3), g in arb_graph()) {
        // close under one free variable x1 by guarding every x2 occurrence
        let f = Expr::exists(vec![2], Vec::new(), Expr::and(Expr::Edge(1, 2), e));
        let r = crate::logic::classify_fragment(&f);
        if !(r.is_gc || r.is_c2 || r.is_gfoc) {
            return Ok(());
        }
        if !f.free_number_vars().is_empty() {
            return Ok(());
        }
        let set = query_set(&g, &f, &reg()).unwrap();
        let colors = color_refinement(&g).colors;
        for u in 0..g.order() {
            for v in 0..g.order() {
                if colors[u] == colors[v] {
                    prop_assert_eq!(set.contains(&u), set.contains(&v));
                }
            }
        }
    }
}
