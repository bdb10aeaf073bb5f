//! Brute-force equivalence of two expressions over a family of graphs.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TranslateError;
use crate::graph::{enumerate_graphs, graph_count, random_graph, GraphError, LabelledGraph, DEFAULT_ENUM_CAP};
use crate::logic::ast::{Expr, NVar, VVar};
use crate::logic::builtins::BuiltinRegistry;
use crate::logic::eval::{CompiledFormula, Valuation, Value};
use crate::nat::Nat;

/// Graphs to compare on. Every graph has an index so that work can be
/// split and the first disagreement picked deterministically.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    /// Every labelled graph with `min_order..=max_order` vertices.
    Enumerate { min_order: usize, max_order: usize, labels: usize },
    /// `samples` random graphs; graph `i` has order drawn from
    /// `min_order..=max_order` and comes from its own seeded stream.
    Random { samples: usize, min_order: usize, max_order: usize, labels: usize, edge_prob: f64, seed: u64 },
}

impl GraphSource {
    pub fn len(&self) -> Result<u64, GraphError> {
        match *self {
            GraphSource::Enumerate { min_order, max_order, labels } => {
                let mut total = 0u64;
                for n in min_order..=max_order {
                    if n > DEFAULT_ENUM_CAP {
                        return Err(GraphError::CapExceeded { n, cap: DEFAULT_ENUM_CAP });
                    }
                    total += graph_count(n, labels).ok_or(GraphError::CapExceeded { n, cap: DEFAULT_ENUM_CAP })?;
                }
                Ok(total)
            }
            GraphSource::Random { samples, .. } => Ok(samples as u64),
        }
    }

    pub fn is_empty(&self) -> Result<bool, GraphError> {
        Ok(self.len()? == 0)
    }

    /// The graph with the given index; indices past `len` are an error.
    pub fn graph(&self, mut index: u64) -> Result<LabelledGraph, GraphError> {
        match *self {
            GraphSource::Enumerate { min_order, max_order, labels } => {
                for n in min_order..=max_order {
                    let e = enumerate_graphs(n, labels, DEFAULT_ENUM_CAP)?;
                    if index < e.total() {
                        return Ok(e.graph_at(index));
                    }
                    index -= e.total();
                }
                Err(GraphError::CapExceeded { n: max_order + 1, cap: max_order })
            }
            GraphSource::Random { min_order, max_order, labels, edge_prob, seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index);
                let n = rng.gen_range(min_order..=max_order);
                Ok(random_graph(&mut rng, n, labels, edge_prob))
            }
        }
    }

    pub fn graphs(&self) -> Result<impl Iterator<Item = LabelledGraph> + '_, GraphError> {
        let len = self.len()?;
        Ok((0..len).map(move |i| self.graph(i).expect("index below len")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub graph: LabelledGraph,
    pub valuation: Valuation,
    pub lhs: Value,
    pub rhs: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivalenceOutcome {
    Pass { graphs: u64, checks: u64 },
    Counterexample(Box<Counterexample>),
}

/// Both sides compiled, with the assignments to try.
pub struct EquivalenceJob {
    lhs: CompiledFormula,
    rhs: CompiledFormula,
    vertex_vars: Vec<VVar>,
    number_vars: Vec<(NVar, u32)>,
}

impl EquivalenceJob {
    /// Free number variables range over `0..n^deg`; a missing degree means 1.
    pub fn new(
        lhs: &Expr,
        rhs: &Expr,
        degrees: &BTreeMap<NVar, u32>,
        reg: &BuiltinRegistry,
    ) -> Result<Self, TranslateError> {
        let mut vertex: Vec<VVar> = lhs.free_vertex_vars().union(&rhs.free_vertex_vars()).copied().collect();
        vertex.sort_unstable();
        let number: Vec<(NVar, u32)> = lhs
            .free_number_vars()
            .union(&rhs.free_number_vars())
            .map(|y| (*y, degrees.get(y).copied().unwrap_or(1)))
            .collect();
        Ok(EquivalenceJob {
            lhs: CompiledFormula::compile(lhs, reg)?,
            rhs: CompiledFormula::compile(rhs, reg)?,
            vertex_vars: vertex,
            number_vars: number,
        })
    }

    /// First disagreement on `g` in lexicographic assignment order, and the
    /// number of assignments checked.
    pub fn check_graph(&self, g: &LabelledGraph) -> Result<(Option<Counterexample>, u64), TranslateError> {
        let n = g.order() as u64;
        let mut radices: Vec<u64> = self.vertex_vars.iter().map(|_| n).collect();
        for &(_, deg) in &self.number_vars {
            radices.push(n.checked_pow(deg).ok_or(TranslateError::CapExceeded {
                what: "number range",
                value: n,
                cap: u32::MAX as u64,
            })?);
        }
        if radices.iter().any(|&r| r == 0) {
            return Ok((None, 0));
        }
        let mut l = self.lhs.evaluator(g)?;
        let mut r = self.rhs.evaluator(g)?;
        let mut digits = alloc::vec![0u64; radices.len()];
        let mut checks = 0;
        loop {
            let mut val = Valuation::new();
            for (x, &v) in self.vertex_vars.iter().zip(&digits) {
                val.vertex.insert(*x, v as usize);
            }
            for ((y, _), &v) in self.number_vars.iter().zip(&digits[self.vertex_vars.len()..]) {
                val.number.insert(*y, Nat::from(v));
            }
            let (a, b) = (l.eval(&val)?, r.eval(&val)?);
            checks += 1;
            if a != b {
                return Ok((Some(Counterexample { graph: g.clone(), valuation: val, lhs: a, rhs: b }), checks));
            }
            // odometer, last digit fastest
            let mut i = digits.len();
            loop {
                if i == 0 {
                    return Ok((None, checks));
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < radices[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
    }
}

/// Compares `lhs` and `rhs` on every graph of `source` under every
/// assignment of their free variables.
pub fn equivalence_check(
    lhs: &Expr,
    rhs: &Expr,
    source: &GraphSource,
    degrees: &BTreeMap<NVar, u32>,
    reg: &BuiltinRegistry,
) -> Result<EquivalenceOutcome, TranslateError> {
    let job = EquivalenceJob::new(lhs, rhs, degrees, reg)?;
    let mut graphs = 0;
    let mut checks = 0;
    for g in source.graphs()? {
        let (cex, c) = job.check_graph(&g)?;
        graphs += 1;
        checks += c;
        if let Some(cex) = cex {
            return Ok(EquivalenceOutcome::Counterexample(Box::new(cex)));
        }
    }
    Ok(EquivalenceOutcome::Pass { graphs, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;

    const Q1: &str = "exists x2 . E(x1,x2) & #(x1).(E(x2,x1) & x1 = x1) > #(x2).(E(x1,x2) & x2 = x2)";
    const Q1_MODAL: &str =
        "exists (y1 < ord) . y1 = #(x2).(E(x1,x2) & x2 = x2) & (exists x2 . E(x1,x2) & y1 < #(x1).(E(x2,x1) & x1 = x1))";

    #[test]
    fn hand_written_modal_form_agrees() {
        let reg = BuiltinRegistry::standard();
        let src = GraphSource::Enumerate { min_order: 1, max_order: 5, labels: 0 };
        let out = equivalence_check(
            &parse_formula(Q1).unwrap(),
            &parse_formula(Q1_MODAL).unwrap(),
            &src,
            &BTreeMap::new(),
            &reg,
        )
        .unwrap();
        assert!(matches!(out, EquivalenceOutcome::Pass { graphs: 1099, .. }));
    }

    #[test]
    fn negation_is_caught() {
        let reg = BuiltinRegistry::standard();
        let f = parse_formula("P1(x1)").unwrap();
        let src = GraphSource::Enumerate { min_order: 1, max_order: 2, labels: 1 };
        match equivalence_check(&f, &Expr::not(f.clone()), &src, &BTreeMap::new(), &reg).unwrap() {
            EquivalenceOutcome::Counterexample(c) => {
                assert_eq!(c.graph.order(), 1);
                assert_eq!(c.valuation.vertex[&1], 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_numbers_range_by_degree() {
        let reg = BuiltinRegistry::standard();
        let f = parse_formula("y1 < ord").unwrap();
        let src = GraphSource::Enumerate { min_order: 1, max_order: 3, labels: 0 };
        let degs = BTreeMap::from([(1, 1)]);
        assert!(matches!(
            equivalence_check(&f, &Expr::True, &src, &degs, &reg).unwrap(),
            EquivalenceOutcome::Pass { .. }
        ));
        let degs = BTreeMap::from([(1, 2)]);
        assert!(matches!(
            equivalence_check(&f, &Expr::True, &src, &degs, &reg).unwrap(),
            EquivalenceOutcome::Counterexample(_)
        ));
    }

    #[test]
    fn random_source_is_reproducible() {
        let src = GraphSource::Random { samples: 5, min_order: 3, max_order: 9, labels: 1, edge_prob: 0.4, seed: 7 };
        let a: Vec<_> = src.graphs().unwrap().collect();
        let b: Vec<_> = src.graphs().unwrap().collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|g| (3..=9).contains(&g.order())));
        assert_eq!(src.graph(3).unwrap(), a[3]);
    }
}
