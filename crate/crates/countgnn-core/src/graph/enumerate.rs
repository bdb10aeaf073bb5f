//! Exhaustive enumeration of labelled graphs on a fixed vertex set.

use alloc::vec::Vec;

use super::{GraphError, LabelledGraph};

pub const DEFAULT_ENUM_CAP: usize = 7;

/// Number of labelled graphs on `n` vertices with label width `l`, or `None`
/// when it does not fit in a `u64`.
pub fn graph_count(n: usize, l: usize) -> Option<u64> {
    let bits = n * n.saturating_sub(1) / 2 + n * l;
    if bits >= 64 {
        None
    } else {
        Some(1u64 << bits)
    }
}

/// Streams every graph on `0..n` with label width `l` exactly once. No
/// isomorph rejection: index bits are edges in lexicographic pair order
/// followed by label bits vertex-major.
#[derive(Debug, Clone)]
pub struct GraphEnumerator {
    n: usize,
    label_width: usize,
    pairs: Vec<(usize, usize)>,
    next: u64,
    total: u64,
}

pub fn enumerate_graphs(n: usize, label_width: usize, cap: usize) -> Result<GraphEnumerator, GraphError> {
    if n > cap {
        return Err(GraphError::CapExceeded { n, cap });
    }
    let total = graph_count(n, label_width).ok_or(GraphError::CapExceeded { n, cap })?;
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            pairs.push((u, v));
        }
    }
    Ok(GraphEnumerator { n, label_width, pairs, next: 0, total })
}

impl GraphEnumerator {
    pub fn total(&self) -> u64 {
        self.total
    }

    /// The graph with the given enumeration index.
    pub fn graph_at(&self, index: u64) -> LabelledGraph {
        let edges: Vec<(usize, usize)> = self
            .pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| (index >> i) & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        let base = self.pairs.len();
        let labels = (0..self.n)
            .map(|v| (0..self.label_width).map(|b| (index >> (base + v * self.label_width + b)) & 1 == 1).collect())
            .collect();
        LabelledGraph::new(self.n, self.label_width, &edges, labels).expect("enumerated graph is simple")
    }
}

impl Iterator for GraphEnumerator {
    type Item = LabelledGraph;

    fn next(&mut self) -> Option<LabelledGraph> {
        if self.next >= self.total {
            return None;
        }
        let g = self.graph_at(self.next);
        self.next += 1;
        Some(g)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}
