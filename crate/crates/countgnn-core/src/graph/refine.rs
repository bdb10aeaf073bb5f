//! Colour refinement (1-WL) on labelled graphs.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::LabelledGraph;

/// Stable colouring of one graph. Colours are dense ranks `0..classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub colors: Vec<usize>,
    /// Refinement rounds performed before the partition stopped splitting.
    pub rounds: usize,
}

impl Coloring {
    pub fn classes(&self) -> usize {
        self.colors.iter().copied().max().map_or(0, |m| m + 1)
    }
}

fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).expect("key present")).collect()
}

fn initial(g: &LabelledGraph) -> Vec<usize> {
    let keys: Vec<Vec<bool>> = (0..g.order()).map(|v| g.labels(v).to_vec()).collect();
    rank(&keys)
}

fn step(g: &LabelledGraph, colors: &[usize]) -> Vec<usize> {
    let keys: Vec<(usize, Vec<usize>)> = (0..g.order())
        .map(|v| {
            let mut nb: Vec<usize> = g.neighbours(v).iter().map(|&w| colors[w]).collect();
            nb.sort_unstable();
            (colors[v], nb)
        })
        .collect();
    rank(&keys)
}

/// Refines the label partition until it stops splitting.
pub fn color_refinement(g: &LabelledGraph) -> Coloring {
    let mut colors = initial(g);
    let mut classes = colors.iter().copied().max().map_or(0, |m| m + 1);
    let mut rounds = 0;
    loop {
        let next = step(g, &colors);
        let next_classes = next.iter().copied().max().map_or(0, |m| m + 1);
        if next_classes == classes {
            return Coloring { colors: next, rounds };
        }
        colors = next;
        classes = next_classes;
        rounds += 1;
    }
}

/// Whether joint refinement on the disjoint union gives `v` in `g` and `w`
/// in `h` the same stable colour.
pub fn cr_equivalent(g: &LabelledGraph, v: usize, h: &LabelledGraph, w: usize) -> bool {
    if g.label_width() != h.label_width() {
        return false;
    }
    let c = color_refinement(&g.disjoint_union(h));
    c.colors[v] == c.colors[g.order() + w]
}

/// Whether colour refinement fails to distinguish `g` and `h` as wholes.
pub fn cr_equivalent_graphs(g: &LabelledGraph, h: &LabelledGraph) -> bool {
    if g.order() != h.order() || g.label_width() != h.label_width() {
        return false;
    }
    let c = color_refinement(&g.disjoint_union(h));
    let n = g.order();
    let mut left: Vec<usize> = c.colors[..n].to_vec();
    let mut right: Vec<usize> = c.colors[n..].to_vec();
    left.sort_unstable();
    right.sort_unstable();
    left == right
}

/// Colours vertices of many graphs in one shared namespace: two vertices,
/// possibly in different graphs, receive the same colour after `rounds`
/// rounds iff their refinement histories agree.
#[derive(Debug, Default)]
pub struct CrInterner {
    labels: HashMap<Vec<bool>, u32>,
    signatures: Vec<HashMap<(u32, Vec<u32>), u32>>,
}

impl CrInterner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn colors(&mut self, g: &LabelledGraph, rounds: usize) -> Vec<u32> {
        let mut colors: Vec<u32> = (0..g.order())
            .map(|v| {
                let next = self.labels.len() as u32;
                *self.labels.entry(g.labels(v).to_vec()).or_insert(next)
            })
            .collect();
        if self.signatures.len() < rounds {
            self.signatures.resize_with(rounds, HashMap::new);
        }
        for r in 0..rounds {
            let table = &mut self.signatures[r];
            let next_colors: Vec<u32> = (0..g.order())
                .map(|v| {
                    let mut nb: Vec<u32> = g.neighbours(v).iter().map(|&w| colors[w]).collect();
                    nb.sort_unstable();
                    let next = table.len() as u32;
                    *table.entry((colors[v], nb)).or_insert(next)
                })
                .collect();
            colors = next_colors;
        }
        colors
    }
}

/// Colour classes of a single graph as vertex lists, ordered by colour.
pub fn classes_of(colors: &[usize]) -> Vec<Vec<usize>> {
    let k = colors.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); k];
    for (v, &c) in colors.iter().enumerate() {
        out[c].push(v);
    }
    out
}
