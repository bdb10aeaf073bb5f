//! Desk-scale networks and formula corpora shared by the integration tests.
#![allow(dead_code)]

use countgnn_core::gnn::{Activation, Aggregation, Dense, Fnn, Gnn, GnnLayer, Side};
use countgnn_core::rational::{int, ratio};

pub fn dense(w: &[&[i64]], b: &[i64], act: Activation) -> Dense {
    Dense::from_ints(w, b, act).unwrap()
}

pub fn fnn(input: usize, layers: Vec<Dense>) -> Fnn {
    Fnn::new(input, layers).unwrap()
}

fn net(input: usize, layers: Vec<GnnLayer>) -> Gnn {
    Gnn::new(input, layers).unwrap()
}

fn layer(side: Side, msg: Fnn, agg: Aggregation, comb: Fnn) -> GnnLayer {
    GnnLayer::new(side, msg, agg, comb).unwrap()
}

/// 1-GNNs with arbitrary message networks, for identity-message normalisation.
pub fn idmsg_networks() -> Vec<(&'static str, Gnn)> {
    let degree_gate = layer(
        Side::One,
        Fnn::constant(1, vec![int(1)]),
        Aggregation::Sum,
        fnn(2, vec![dense(&[&[0, 1]], &[-2], Activation::Relu)]),
    );
    let label_count = layer(
        Side::One,
        fnn(1, vec![dense(&[&[2]], &[-1], Activation::Relu)]),
        Aggregation::Sum,
        fnn(2, vec![dense(&[&[-1, 1]], &[0], Activation::Relu)]),
    );
    let widen = layer(
        Side::One,
        fnn(1, vec![dense(&[&[1]], &[0], Activation::Relu)]),
        Aggregation::Sum,
        fnn(2, vec![dense(&[&[1, 1], &[0, 1]], &[0, -1], Activation::Relu)]),
    );
    let top = layer(
        Side::One,
        fnn(2, vec![dense(&[&[1, -1]], &[0], Activation::Relu)]),
        Aggregation::Max,
        fnn(3, vec![dense(&[&[1, 0, 2], &[0, 1, -1]], &[0, 1], Activation::Relu), dense(&[&[1, -1]], &[0], Activation::Id)]),
    );
    let mean_layer = layer(
        Side::One,
        fnn(1, vec![dense(&[&[-1]], &[1], Activation::Id)]),
        Aggregation::Mean,
        fnn(2, vec![dense(&[&[1, 2]], &[0], Activation::Id)]),
    );
    vec![
        ("degree-gate", net(1, vec![degree_gate])),
        ("label-count", net(1, vec![label_count])),
        ("sum-then-max", net(1, vec![widen, top])),
        ("mean-complement", net(1, vec![mean_layer])),
    ]
}

/// 2-GNNs with MEAN aggregation and affine messages.
pub fn linmean_networks() -> Vec<(&'static str, Gnn)> {
    let projection = layer(
        Side::Two,
        Fnn::select(2, &[1]),
        Aggregation::Mean,
        Fnn::affine(vec![vec![int(1), int(2)]], vec![int(0)], 2).unwrap(),
    );
    let constant = layer(
        Side::Two,
        Fnn::constant(2, vec![int(3)]),
        Aggregation::Mean,
        Fnn::affine(vec![vec![int(0), int(1)]], vec![int(0)], 2).unwrap(),
    );
    let first = layer(
        Side::Two,
        fnn(2, vec![dense(&[&[1, -1], &[0, 1]], &[0, 1], Activation::Id)]),
        Aggregation::Mean,
        fnn(3, vec![dense(&[&[1, 1, -1]], &[1], Activation::Relu)]),
    );
    let second = layer(
        Side::Two,
        fnn(2, vec![Dense::new(vec![vec![ratio(-1, 2), int(2)]], vec![ratio(1, 3)], 2, Activation::Id).unwrap()]),
        Aggregation::Mean,
        fnn(2, vec![dense(&[&[1, -3]], &[1], Activation::Relu)]),
    );
    vec![
        ("sender-projection", net(1, vec![projection])),
        ("constant-message", net(1, vec![constant])),
        ("two-layer-affine", net(1, vec![first, second])),
    ]
}

/// 2-GNNs with MAX aggregation, one input channel and at most two layers.
pub fn max_networks() -> Vec<(&'static str, Gnn)> {
    let nbr_label = || layer(Side::Two, Fnn::select(2, &[1]), Aggregation::Max, Fnn::select(2, &[1]));
    let gap = layer(
        Side::Two,
        fnn(2, vec![dense(&[&[-1, 1]], &[0], Activation::Relu)]),
        Aggregation::Max,
        fnn(2, vec![dense(&[&[1, 1]], &[0], Activation::Id)]),
    );
    let both = layer(
        Side::Two,
        fnn(2, vec![dense(&[&[1, 1]], &[-1], Activation::Relu)]),
        Aggregation::Max,
        Fnn::select(2, &[1]),
    );
    let msg = fnn(2, vec![dense(&[&[-1, 1], &[1, 1]], &[0, 0], Activation::Relu)]);
    let comb = fnn(
        3,
        vec![Dense::new(vec![vec![int(1), int(1), ratio(-1, 2)], vec![int(0), int(0), int(1)]], vec![int(0), int(-1)], 3, Activation::Id)
            .unwrap()],
    );
    let mixed1 = layer(Side::Two, msg, Aggregation::Max, comb);
    let mixed2 = layer(
        Side::Two,
        fnn(4, vec![dense(&[&[1, 0, -1, 1]], &[0], Activation::Relu)]),
        Aggregation::Max,
        fnn(3, vec![dense(&[&[1, -1, 2]], &[0], Activation::Id)]),
    );
    let diff = layer(
        Side::Two,
        fnn(2, vec![dense(&[&[1, -1]], &[0], Activation::Relu)]),
        Aggregation::Max,
        fnn(2, vec![dense(&[&[-1, 2]], &[0], Activation::Id)]),
    );
    vec![
        ("neighbour-label", net(1, vec![nbr_label()])),
        ("label-gap", net(1, vec![gap])),
        ("labelled-edge", net(1, vec![both])),
        ("two-layer-mixed", net(1, vec![mixed1, mixed2])),
        ("label-then-difference", net(1, vec![nbr_label(), diff])),
    ]
}

/// Depth-1 2-GNNs with MEAN aggregation and a single output.
pub fn mean_networks() -> Vec<(&'static str, Gnn)> {
    let msg = fnn(
        2,
        vec![
            Dense::new(vec![vec![int(-1), int(1)], vec![int(0), ratio(1, 2)]], vec![int(0), int(0)], 2, Activation::Relu).unwrap(),
            dense(&[&[1, 1]], &[0], Activation::Id),
        ],
    );
    let comb = fnn(2, vec![dense(&[&[-1, 2], &[-1, 2]], &[0, -1], Activation::Relu), dense(&[&[1, -1]], &[0], Activation::Id)]);
    let mixed = layer(Side::Two, msg, Aggregation::Mean, comb);
    // 0 below a half labelled neighbourhood, 1 from three quarters on
    let majority = layer(
        Side::Two,
        Fnn::select(2, &[1]),
        Aggregation::Mean,
        fnn(2, vec![dense(&[&[0, 4], &[0, 4]], &[-2, -3], Activation::Relu), dense(&[&[1, -1]], &[0], Activation::Id)]),
    );
    let disagree = layer(
        Side::Two,
        fnn(2, vec![dense(&[&[1, -1], &[-1, 1]], &[0, 0], Activation::Relu), dense(&[&[1, 1]], &[0], Activation::Id)]),
        Aggregation::Mean,
        fnn(2, vec![dense(&[&[0, 2]], &[0], Activation::Relu)]),
    );
    vec![("mixed-message", net(1, vec![mixed])), ("labelled-majority", net(1, vec![majority])), ("disagreement", net(1, vec![disagree]))]
}

/// Guarded two-variable formulas with counting quantifiers: quantifier
/// depth at most 2, thresholds at most 3, one label.
pub const GC_CORPUS: &[&str] = &[
    "P1(x1)",
    "!P1(x1)",
    "exists^{>=1} x2 . E(x1,x2) & P1(x2)",
    "exists^{>=2} x2 . E(x1,x2) & P1(x2)",
    "exists^{>=3} x2 . E(x1,x2) & !P1(x2)",
    "exists^{>=1} x2 . E(x1,x2) & P1(x1) & P1(x2)",
    "exists^{>=2} x2 . E(x1,x2) & (P1(x1) | P1(x2))",
    "P1(x1) & exists^{>=2} x2 . E(x1,x2) & P1(x2)",
    "exists^{>=2} x2 . E(x2,x1) & !(x1 = x2) & ((P1(x1) & P1(x2)) | (exists^{>=1} x1 . E(x2,x1) & P1(x1) & !P1(x2)))",
    "exists^{>=1} x2 . E(x1,x2) & ((P1(x1) & P1(x2)) | (!P1(x1) & !P1(x2)))",
    "exists^{>=2} x2 . E(x1,x2) & !(P1(x1) & P1(x2))",
    "exists^{>=1} x2 . E(x1,x2) & (exists^{>=2} x1 . E(x2,x1) & P1(x1))",
    "exists^{>=1} x2 . E(x1,x2) & P1(x1) & (exists^{>=3} x1 . E(x2,x1) & !P1(x1))",
    "exists^{>=3} x2 . E(x1,x2) & !(x1 = x2)",
    "P1(x1) & !(exists^{>=2} x2 . E(x1,x2) & P1(x2))",
    "exists^{>=1} x2 . E(x2,x1) & (P1(x2) | (exists^{>=1} x1 . E(x2,x1) & P1(x1) & !P1(x2)))",
    "exists^{>=2} x2 . E(x1,x2) & (exists^{>=2} x1 . E(x2,x1) & (P1(x1) | P1(x2)))",
    "(exists^{>=1} x2 . E(x1,x2) & P1(x2)) | (exists^{>=3} x2 . E(x1,x2) & x2 = x2)",
    "exists^{>=1} x2 . E(x1,x2) & !P1(x1) & !(exists^{>=1} x1 . E(x2,x1) & P1(x1))",
    "exists^{>=2} x2 . E(x1,x2) & ((P1(x1) & !P1(x2)) | (!P1(x1) & P1(x2)))",
    "exists^{>=1} x2 . E(x1,x2) & (exists^{>=2} x1 . E(x2,x1) & P1(x2) & !P1(x1))",
    "!(exists^{>=1} x2 . E(x1,x2) & !(exists^{>=1} x1 . E(x2,x1) & !(x1 = x2) & P1(x1)))",
];

/// The larger-degree-neighbour query with both degrees compared inside a
/// counting comparison.
pub const Q1: &str = "exists x2 . E(x1,x2) & #(x1).(E(x2,x1) & x1 = x1) > #(x2).(E(x1,x2) & x2 = x2)";

/// The same query with the own degree named by a number variable first.
pub const Q1_MODAL: &str =
    "exists (y1 < ord) . y1 = #(x2).(E(x1,x2) & x2 = x2) & (exists x2 . E(x1,x2) & y1 < #(x1).(E(x2,x1) & x1 = x1))";

/// The larger-degree-neighbour query in guarded simple form with both
/// degrees named below `ord`.
pub const Q1_NAMED: &str = "exists x2 . E(x1,x2) & (exists (y1 < ord) . y1 = #(x2).(E(x1,x2) & x2 = x2) & (exists (y2 < ord) . y2 = #(x1).(E(x2,x1) & x1 = x1) & y1 < y2))";

/// Equal-degree neighbour, same shape as [`Q1_NAMED`].
pub const EQUAL_NAMED: &str = "exists x2 . E(x1,x2) & (exists (y1 < ord) . y1 = #(x2).(E(x1,x2) & x2 = x2) & (exists (y2 < ord) . y2 = #(x1).(E(x2,x1) & x1 = x1) & y1 = y2))";

/// Guarded formulas whose counting sites carry no number parameters.
pub const LABEL_GUARDED: &[&str] = &[
    "exists x2 . E(x1,x2) & P1(x1) & P1(x2)",
    "exists^{>=2} x2 . E(x1,x2) & (P1(x1) | P1(x2))",
    "exists x2 . E(x1,x2) & (P1(x1) | !P1(x2))",
];

/// Modal and guarded formulas with number quantifiers and counting terms.
pub const FOC_CORPUS: &[&str] = &[
    Q1,
    Q1_MODAL,
    Q1_NAMED,
    EQUAL_NAMED,
    "exists (y0 < ord) . 2*y0 = #(x2).(E(x1,x2) & x2 = x2)",
    "#(x2).(E(x1,x2) & P1(x2)) > #(x2).(E(x1,x2) & !P1(x2))",
    "#(x2).(E(x1,x2) & P1(x1) & !P1(x2)) > 1",
    "exists (y1 < ord) . y1 = #(x2).(E(x1,x2) & P1(x2)) & y1 + y1 = #(x2).(E(x1,x2) & x2 = x2)",
];
