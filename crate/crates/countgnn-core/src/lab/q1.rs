//! The two-layer 2-GNN selecting vertices with a neighbour of larger degree.

use alloc::vec;
use alloc::vec::Vec;

use crate::gnn::{Activation, Aggregation, Dense, Fnn, Gnn, GnnLayer, Side};
use crate::graph::LabelledGraph;

fn fnn(input: usize, layers: Vec<Dense>) -> Fnn {
    Fnn::new(input, layers).expect("hand-built network")
}

fn dense(w: &[&[i64]], b: &[i64], act: Activation) -> Dense {
    Dense::from_ints(w, b, act).expect("hand-built layer")
}

/// Layer 1 stores the degree (sum of constant messages 1). Layer 2 sends
/// `relu(d_w - d_v) - relu(d_w - d_v - 1)` to the receiver `v` and combines
/// with `relu(s) - relu(s - 1)`. Takes unlabelled graphs (input dimension 0).
pub fn build_q1_2gnn() -> Gnn {
    let msg1 = fnn(0, vec![Dense::new(vec![vec![]], vec![crate::rational::one()], 0, Activation::Id).expect("constant")]);
    let comb1 = fnn(1, vec![dense(&[&[1]], &[0], Activation::Id)]);
    let l1 = GnnLayer::new(Side::One, msg1, Aggregation::Sum, comb1).expect("layer 1");
    let msg2 = fnn(2, vec![dense(&[&[-1, 1], &[-1, 1]], &[0, -1], Activation::Relu), dense(&[&[1, -1]], &[0], Activation::Id)]);
    let comb2 = fnn(2, vec![dense(&[&[0, 1], &[0, 1]], &[0, -1], Activation::Relu), dense(&[&[1, -1]], &[0], Activation::Id)]);
    let l2 = GnnLayer::new(Side::Two, msg2, Aggregation::Sum, comb2).expect("layer 2");
    Gnn::new(0, vec![l1, l2]).expect("dimensions chain")
}

/// Vertices with a neighbour of strictly larger degree, straight from the
/// definition.
pub fn q1_expected(g: &LabelledGraph) -> Vec<usize> {
    (0..g.order()).filter(|&v| g.neighbours(v).iter().any(|&w| g.degree(w) > g.degree(v))).collect()
}
