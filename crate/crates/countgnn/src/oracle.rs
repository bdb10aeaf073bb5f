//! Brute-force oracles over graph families, split across worker threads.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};

use countgnn_core::gnn::{gnn_run, Gnn, GnnError};
use countgnn_core::graph::{GraphError, LabelledGraph, Signal};
use countgnn_core::logic::translate::{EquivalenceJob, EquivalenceOutcome, GraphSource, TranslateError};
use countgnn_core::logic::{BuiltinRegistry, Expr, NVar};
use countgnn_core::rational::{self, Q};

use crate::parallel::{ordered_find_map, ordered_map};

/// `equivalence_check` with the graphs of `source` spread over `workers`
/// threads; the reported counterexample is the one at the smallest index.
pub fn parallel_equivalence(
    lhs: &Expr,
    rhs: &Expr,
    source: &GraphSource,
    degrees: &BTreeMap<NVar, u32>,
    reg: &BuiltinRegistry,
    workers: NonZeroUsize,
) -> Result<EquivalenceOutcome, TranslateError> {
    let job = EquivalenceJob::new(lhs, rhs, degrees, reg)?;
    let len = source.len()?;
    // only read when no worker stops early, so the total is split-independent
    let checks = AtomicU64::new(0);
    let hit = ordered_find_map(len, workers, |i| {
        let run = || -> Result<Option<_>, TranslateError> {
            let g = source.graph(i)?;
            let (cex, c) = job.check_graph(&g)?;
            checks.fetch_add(c, Ordering::Relaxed);
            Ok(cex)
        };
        match run() {
            Ok(None) => None,
            Ok(Some(cex)) => Some(Ok(cex)),
            Err(e) => Some(Err(e)),
        }
    });
    match hit {
        Some((_, Ok(cex))) => Ok(EquivalenceOutcome::Counterexample(Box::new(cex))),
        Some((_, Err(e))) => Err(e),
        None => Ok(EquivalenceOutcome::Pass { graphs: len, checks: checks.into_inner() }),
    }
}

/// Largest coordinatewise deviation between two networks run on the
/// Boolean label signals of every graph in `source`.
pub fn max_deviation(a: &Gnn, b: &Gnn, source: &GraphSource, workers: NonZeroUsize) -> Result<Q, GnnError> {
    let len = source.len()?;
    let per_graph = ordered_map(len, workers, |i| -> Result<Q, GnnError> {
        let g = source.graph(i)?;
        deviation_on(a, b, &g)
    });
    let mut worst = rational::zero();
    for d in per_graph {
        let d = d?;
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

pub fn deviation_on(a: &Gnn, b: &Gnn, g: &LabelledGraph) -> Result<Q, GnnError> {
    let x = Signal::from_labels(g);
    let (ya, yb) = (gnn_run(a, g, &x)?, gnn_run(b, g, &x)?);
    let mut worst = rational::zero();
    for v in 0..g.order() {
        let d = rational::vec_sub_abs_max(ya.row(v), yb.row(v));
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// The graphs of `source` in index order.
pub fn collect_graphs(source: &GraphSource) -> Result<Vec<LabelledGraph>, GraphError> {
    Ok(source.graphs()?.collect())
}
