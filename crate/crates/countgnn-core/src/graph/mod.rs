//! Finite simple undirected graphs with Boolean vertex labels and rational
//! signals.

mod enumerate;
mod refine;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::rational::Q;

pub use enumerate::{enumerate_graphs, graph_count, GraphEnumerator, DEFAULT_ENUM_CAP};
pub use refine::{classes_of, color_refinement, cr_equivalent, cr_equivalent_graphs, Coloring, CrInterner};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge {0}-{1} refers to a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("edge {0}-{1} listed twice")]
    DuplicateEdge(usize, usize),
    #[error("adjacency is not symmetric at {0}-{1}")]
    Asymmetric(usize, usize),
    #[error("vertex {vertex} has a label of width {found}, expected {expected}")]
    LabelWidth { vertex: usize, found: usize, expected: usize },
    #[error("expected {expected} label rows, found {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("graph order {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("signal has {found} rows for a graph of order {expected}")]
    SignalLength { expected: usize, found: usize },
    #[error("signal row {vertex} has dimension {found}, expected {expected}")]
    SignalWidth { vertex: usize, found: usize, expected: usize },
}

/// A Λ-labelled simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelledGraph {
    n: usize,
    label_width: usize,
    adj: Vec<Vec<usize>>,
    matrix: Vec<bool>,
    labels: Vec<Vec<bool>>,
}

impl LabelledGraph {
    /// Builds a graph from an undirected edge list; each pair may appear once
    /// in either orientation.
    pub fn new(
        n: usize,
        label_width: usize,
        edges: &[(usize, usize)],
        labels: Vec<Vec<bool>>,
    ) -> Result<Self, GraphError> {
        if labels.len() != n {
            return Err(GraphError::LabelCount { expected: n, found: labels.len() });
        }
        for (v, row) in labels.iter().enumerate() {
            if row.len() != label_width {
                return Err(GraphError::LabelWidth {
                    vertex: v,
                    found: row.len(),
                    expected: label_width,
                });
            }
        }
        let mut g = LabelledGraph {
            n,
            label_width,
            adj: vec![Vec::new(); n],
            matrix: vec![false; n * n],
            labels,
        };
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange(u, v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if g.matrix[u * n + v] {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            g.matrix[u * n + v] = true;
            g.matrix[v * n + u] = true;
        }
        g.rebuild_lists();
        Ok(g)
    }

    /// Builds a graph from a full adjacency matrix, checking symmetry and
    /// irreflexivity.
    pub fn from_matrix(
        n: usize,
        matrix: &[Vec<bool>],
        labels: Vec<Vec<bool>>,
        label_width: usize,
    ) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for u in 0..n {
            if matrix[u][u] {
                return Err(GraphError::SelfLoop(u));
            }
            for v in (u + 1)..n {
                if matrix[u][v] != matrix[v][u] {
                    return Err(GraphError::Asymmetric(u, v));
                }
                if matrix[u][v] {
                    edges.push((u, v));
                }
            }
        }
        Self::new(n, label_width, &edges, labels)
    }

    pub fn unlabelled(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(n, 0, edges, vec![Vec::new(); n])
    }

    fn rebuild_lists(&mut self) {
        let n = self.n;
        for u in 0..n {
            self.adj[u] = (0..n).filter(|&v| self.matrix[u * n + v]).collect();
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn label_width(&self) -> usize {
        self.label_width
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.matrix[u * self.n + v]
    }

    pub fn label(&self, v: usize, bit: usize) -> bool {
        self.labels[v][bit]
    }

    pub fn labels(&self, v: usize) -> &[bool] {
        &self.labels[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Relabels vertices: vertex `v` of `self` becomes `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> LabelledGraph {
        let edges: Vec<(usize, usize)> = self.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let mut labels = vec![Vec::new(); self.n];
        for v in 0..self.n {
            labels[perm[v]] = self.labels[v].clone();
        }
        LabelledGraph::new(self.n, self.label_width, &edges, labels).expect("permutation of a valid graph")
    }

    /// Disjoint union; vertices of `other` are shifted by `self.order()`.
    pub fn disjoint_union(&self, other: &LabelledGraph) -> LabelledGraph {
        assert_eq!(self.label_width, other.label_width, "label widths differ");
        let shift = self.n;
        let mut edges = self.edges();
        edges.extend(other.edges().into_iter().map(|(u, v)| (u + shift, v + shift)));
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        LabelledGraph::new(self.n + other.n, self.label_width, &edges, labels).expect("union of valid graphs")
    }

    /// Graph with extra isolated vertices appended (labels all false).
    pub fn with_isolated(&self, extra: usize) -> LabelledGraph {
        let mut labels = self.labels.clone();
        labels.extend((0..extra).map(|_| vec![false; self.label_width]));
        LabelledGraph::new(self.n + extra, self.label_width, &self.edges(), labels).expect("valid graph")
    }

    pub fn with_labels(&self, label_width: usize, labels: Vec<Vec<bool>>) -> Result<LabelledGraph, GraphError> {
        LabelledGraph::new(self.n, label_width, &self.edges(), labels)
    }
}

/// K_{m,n} with U = `0..m` and V = `m..m+n`.
pub fn make_complete_bipartite(m: usize, n: usize) -> LabelledGraph {
    let mut edges = Vec::with_capacity(m * n);
    for u in 0..m {
        for v in 0..n {
            edges.push((u, m + v));
        }
    }
    LabelledGraph::unlabelled(m + n, &edges).expect("complete bipartite graphs are simple")
}

pub fn cycle(n: usize) -> LabelledGraph {
    let edges: Vec<(usize, usize)> = if n >= 3 { (0..n).map(|i| (i, (i + 1) % n)).collect() } else { Vec::new() };
    LabelledGraph::unlabelled(n, &edges).expect("cycle")
}

pub fn path(n: usize) -> LabelledGraph {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    LabelledGraph::unlabelled(n, &edges).expect("path")
}

/// Erdős–Rényi graph with edge probability `p` and uniform random labels.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, label_width: usize, p: f64) -> LabelledGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let labels = (0..n).map(|_| (0..label_width).map(|_| rng.gen_bool(0.5)).collect()).collect();
    LabelledGraph::new(n, label_width, &edges, labels).expect("random graph")
}

/// Per-vertex vectors of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    dim: usize,
    rows: Vec<Vec<Q>>,
}

impl Signal {
    pub fn new(dim: usize, rows: Vec<Vec<Q>>) -> Result<Self, GraphError> {
        for (v, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(GraphError::SignalWidth { vertex: v, found: r.len(), expected: dim });
            }
        }
        Ok(Signal { dim, rows })
    }

    /// The Boolean signal equivalent to the graph's labels.
    pub fn from_labels(g: &LabelledGraph) -> Signal {
        let rows = (0..g.order())
            .map(|v| g.labels(v).iter().map(|&b| if b { crate::rational::one() } else { crate::rational::zero() }).collect())
            .collect();
        Signal { dim: g.label_width(), rows }
    }

    pub fn zeros(n: usize, dim: usize) -> Signal {
        Signal { dim, rows: vec![vec![crate::rational::zero(); dim]; n] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, v: usize) -> &[Q] {
        &self.rows[v]
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<Q>> {
        self.rows
    }

    pub fn check_order(&self, g: &LabelledGraph) -> Result<(), GraphError> {
        if self.rows.len() != g.order() {
            return Err(GraphError::SignalLength { expected: g.order(), found: self.rows.len() });
        }
        Ok(())
    }

    pub fn permute(&self, perm: &[usize]) -> Signal {
        let mut rows = vec![Vec::new(); self.rows.len()];
        for (v, r) in self.rows.iter().enumerate() {
            rows[perm[v]] = r.clone();
        }
        Signal { dim: self.dim, rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn complete_bipartite_shapes() {
        let g = make_complete_bipartite(2, 3);
        assert_eq!(g.order(), 5);
        assert_eq!(g.edge_count(), 6);
        assert!((0..2).all(|u| g.degree(u) == 3));
        assert!((2..5).all(|v| g.degree(v) == 2));
        let iso = make_complete_bipartite(0, 3);
        assert_eq!(iso.edge_count(), 0);
        assert_eq!(iso.order(), 3);
        let single = make_complete_bipartite(1, 1);
        assert_eq!(single.edges(), vec![(0, 1)]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(LabelledGraph::unlabelled(2, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert!(matches!(
            LabelledGraph::new(2, 2, &[], vec![vec![true, false], vec![true]]),
            Err(GraphError::LabelWidth { vertex: 1, found: 1, expected: 2 })
        ));
        let m = vec![vec![false, true], vec![false, false]];
        assert_eq!(LabelledGraph::from_matrix(2, &m, vec![vec![], vec![]], 0), Err(GraphError::Asymmetric(0, 1)));
        assert!(LabelledGraph::unlabelled(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn labels_become_boolean_signals() {
        let g = LabelledGraph::new(2, 1, &[(0, 1)], vec![vec![true], vec![false]]).unwrap();
        let s = Signal::from_labels(&g);
        assert_eq!(s.dim(), 1);
        assert_eq!(s.row(0), &[crate::rational::one()]);
        assert_eq!(s.row(1), &[crate::rational::zero()]);
    }

    proptest! {
        #[test]
        fn degree_matches_neighbourhood(seed in any::<u64>(), n in 0usize..9) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, 1, 0.5);
            for v in 0..n {
                let count = (0..n).filter(|&w| g.has_edge(v, w)).count();
                prop_assert_eq!(g.degree(v), count);
                prop_assert_eq!(g.neighbours(v).len(), count);
                prop_assert!(!g.has_edge(v, v));
            }
        }
    }
}
