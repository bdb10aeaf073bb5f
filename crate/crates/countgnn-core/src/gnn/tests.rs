use super::*;
use crate::graph::{color_refinement, cycle, make_complete_bipartite, random_graph, LabelledGraph};
use crate::lab::{build_q1_2gnn, q1_expected};
use crate::rational::{int, ratio};
use alloc::vec;
use proptest::prelude::*;
use rand::SeedableRng;

fn degree_layer(p: usize) -> GnnLayer {
    // msg = id on the first coordinate, comb(x, s) = s
    let msg = Fnn::select(p, &[0]);
    let comb = Fnn::select(p + 1, &[p]);
    GnnLayer::new(Side::One, msg, Aggregation::Sum, comb).unwrap()
}

fn ones(n: usize) -> Signal {
    Signal::new(1, vec![vec![int(1)]; n]).unwrap()
}

#[test]
fn sum_layer_counts_degrees() {
    let g = make_complete_bipartite(2, 3);
    let out = layer_apply(&degree_layer(1), &g, &ones(5)).unwrap();
    let vals: Vec<Q> = out.rows().iter().map(|r| r[0].clone()).collect();
    assert_eq!(vals, vec![int(3), int(3), int(2), int(2), int(2)]);
}

#[test]
fn isolated_vertices_see_zero() {
    let g = LabelledGraph::unlabelled(2, &[]).unwrap();
    let comb = Fnn::affine(vec![vec![int(1), int(1)]], vec![int(7)], 2).unwrap();
    for agg in [Aggregation::Sum, Aggregation::Mean, Aggregation::Max] {
        let layer = GnnLayer::new(Side::One, Fnn::identity(1), agg, comb.clone()).unwrap();
        let out = layer_apply(&layer, &g, &ones(2)).unwrap();
        assert_eq!(out.row(0), &[int(8)]);
    }
}

#[test]
fn mean_on_regular_graphs_returns_the_common_state() {
    let g = cycle(5);
    let layer = GnnLayer::new(Side::One, Fnn::identity(1), Aggregation::Mean, Fnn::select(2, &[1])).unwrap();
    let s = Signal::new(1, vec![vec![ratio(2, 3)]; 5]).unwrap();
    assert_eq!(layer_apply(&layer, &g, &s).unwrap(), s);
}

#[test]
fn side_two_messages_see_the_receiver_first() {
    // msg(x_v, x_w) = x_v - 2 x_w; path 0-1 with states 1 and 10
    let msg = Fnn::affine(vec![vec![int(1), int(-2)]], vec![int(0)], 2).unwrap();
    let layer = GnnLayer::new(Side::Two, msg, Aggregation::Sum, Fnn::select(2, &[1])).unwrap();
    let g = LabelledGraph::unlabelled(2, &[(0, 1)]).unwrap();
    let s = Signal::new(1, vec![vec![int(1)], vec![int(10)]]).unwrap();
    let out = layer_apply(&layer, &g, &s).unwrap();
    assert_eq!(out.row(0), &[int(-19)]);
    assert_eq!(out.row(1), &[int(8)]);
}

#[test]
fn layer_dimension_checks() {
    let bad = GnnLayer::new(Side::Two, Fnn::identity(1), Aggregation::Sum, Fnn::identity(2));
    assert!(matches!(bad, Err(GnnError::Dimension { what: "message input", .. })));
    let net = Gnn::new(1, vec![degree_layer(1)]).unwrap();
    let g = cycle(3);
    assert!(matches!(gnn_run(&net, &g, &Signal::zeros(3, 2)), Err(GnnError::Dimension { .. })));
    assert!(matches!(gnn_run(&net, &g, &Signal::zeros(2, 1)), Err(GnnError::Graph(_))));
    assert!(Gnn::new(2, vec![degree_layer(1)]).is_err());
}

#[test]
fn zero_layer_network_is_the_identity() {
    let net = Gnn::new(1, vec![]).unwrap();
    let s = Signal::new(1, vec![vec![ratio(1, 5)], vec![int(4)]]).unwrap();
    let g = LabelledGraph::unlabelled(2, &[(0, 1)]).unwrap();
    assert_eq!(gnn_run(&net, &g, &s).unwrap(), s);
    assert_eq!(gnn_depth(&net), 0);
    assert_eq!(gnn_size(&net), 0);
}

#[test]
fn q1_network_on_complete_bipartite_graphs() {
    let net = build_q1_2gnn();
    let run = |m: usize, n: usize| {
        let g = make_complete_bipartite(m, n);
        gnn_run(&net, &g, &Signal::from_labels(&g)).unwrap()
    };
    let out = run(2, 3);
    let vals: Vec<Q> = out.rows().iter().map(|r| r[0].clone()).collect();
    assert_eq!(vals, vec![int(0), int(0), int(1), int(1), int(1)]);
    let c = classify(&net, &make_complete_bipartite(3, 3)).unwrap();
    assert_eq!(c.rejected, vec![0, 1, 2, 3, 4, 5]);
    let c = classify(&net, &make_complete_bipartite(4, 3)).unwrap();
    assert_eq!(c.selected, vec![0, 1, 2, 3]);
    assert_eq!(c.rejected, vec![4, 5, 6]);
    let star = classify(&net, &make_complete_bipartite(1, 4)).unwrap();
    assert_eq!(star.selected, vec![1, 2, 3, 4]);
    assert_eq!(gnn_depth(&net), 6);
}

#[test]
fn q1_network_matches_definition_on_random_graphs() {
    let net = build_q1_2gnn();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let g = random_graph(&mut rng, 9, 0, 0.4);
        let c = classify(&net, &g).unwrap();
        assert!(c.is_total());
        assert_eq!(c.selected, q1_expected(&g));
    }
}

#[test]
fn constant_half_is_undefined_everywhere() {
    let comb = Fnn::constant(0, vec![ratio(1, 2)]);
    let layer = GnnLayer::new(Side::One, Fnn::new(0, vec![]).unwrap(), Aggregation::Sum, comb).unwrap();
    let net = Gnn::new(0, vec![layer]).unwrap();
    let c = classify(&net, &cycle(4)).unwrap();
    assert_eq!(c.undefined, vec![0, 1, 2, 3]);
    let wide = Gnn::new(1, vec![]).unwrap();
    let g = cycle(3).with_labels(1, vec![vec![true]; 3]).unwrap();
    assert!(classify(&wide, &g).is_ok());
    let two = Gnn::new(2, vec![]).unwrap();
    let g2 = cycle(3).with_labels(2, vec![vec![true, false]; 3]).unwrap();
    assert_eq!(classify(&two, &g2), Err(GnnError::OutputDimension(2)));
}

#[test]
fn depth_and_size_sum_over_layers() {
    let net = build_q1_2gnn();
    let depth: usize = net.layers().iter().map(|l| l.msg().depth() + l.comb().depth()).sum();
    assert_eq!(gnn_depth(&net), depth);
    assert!(gnn_size(&net) > 0);
}

fn small_q() -> impl Strategy<Value = Q> {
    (-4i64..=4, 1i64..=3).prop_map(|(a, b)| ratio(a, b))
}

fn arb_dense(rows: usize, cols: usize) -> impl Strategy<Value = Dense> {
    (prop::collection::vec(prop::collection::vec(small_q(), cols), rows), prop::collection::vec(small_q(), rows), any::<bool>())
        .prop_map(move |(w, b, relu)| Dense::new(w, b, cols, if relu { Activation::Relu } else { Activation::Id }).unwrap())
}

fn arb_layer(p: usize, side: Side) -> impl Strategy<Value = GnnLayer> {
    let msg_in = if side == Side::One { p } else { 2 * p };
    let agg = prop_oneof![Just(Aggregation::Sum), Just(Aggregation::Mean), Just(Aggregation::Max)];
    (arb_dense(2, msg_in), agg, arb_dense(2, p + 2)).prop_map(move |(m, agg, c)| {
        GnnLayer::new(side, Fnn::new(msg_in, vec![m]).unwrap(), agg, Fnn::new(p + 2, vec![c]).unwrap()).unwrap()
    })
}

fn arb_gnn(side: Side) -> impl Strategy<Value = Gnn> {
    (arb_layer(1, side), arb_layer(2, side)).prop_map(|(a, b)| Gnn::new(1, vec![a, b]).unwrap())
}

fn arb_graph() -> impl Strategy<Value = LabelledGraph> {
    (any::<u64>(), 1usize..8).prop_map(|(seed, n)| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        random_graph(&mut rng, n, 1, 0.5)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn runs_are_equivariant(net in arb_gnn(Side::Two), g in arb_graph(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..g.order()).collect();
        perm.shuffle(&mut rng);
        let s = Signal::from_labels(&g);
        let direct = gnn_run(&net, &g, &s).unwrap().permute(&perm);
        let moved = gnn_run(&net, &g.permute(&perm), &s.permute(&perm)).unwrap();
        prop_assert_eq!(direct, moved);
    }

    #[test]
    fn mean_in_hull_and_max_dominates(g in arb_graph(), vals in prop::collection::vec(small_q(), 8)) {
        let s = Signal::new(1, (0..g.order()).map(|v| vec![vals[v].clone()]).collect()).unwrap();
        let mean = GnnLayer::new(Side::One, Fnn::identity(1), Aggregation::Mean, Fnn::select(2, &[1])).unwrap();
        let max = GnnLayer::new(Side::One, Fnn::identity(1), Aggregation::Max, Fnn::select(2, &[1])).unwrap();
        let m = layer_apply(&mean, &g, &s).unwrap();
        let x = layer_apply(&max, &g, &s).unwrap();
        for v in 0..g.order() {
            let nb: Vec<&Q> = g.neighbours(v).iter().map(|&w| &s.row(w)[0]).collect();
            if nb.is_empty() {
                prop_assert_eq!(&m.row(v)[0], &int(0));
                continue;
            }
            let lo = nb.iter().min().unwrap();
            let hi = nb.iter().max().unwrap();
            prop_assert!(*lo <= &m.row(v)[0] && &m.row(v)[0] <= *hi);
            prop_assert!(nb.iter().all(|y| *y <= &x.row(v)[0]));
        }
    }

    #[test]
    fn side_one_states_respect_refinement(net in arb_gnn(Side::One), g in arb_graph()) {
        let colors = color_refinement(&g).colors;
        let trace = gnn_trace(&net, &g, &Signal::from_labels(&g)).unwrap();
        for s in &trace {
            for v in 0..g.order() {
                for w in 0..g.order() {
                    if colors[v] == colors[w] {
                        prop_assert_eq!(s.row(v), s.row(w));
                    }
                }
            }
        }
    }
}
