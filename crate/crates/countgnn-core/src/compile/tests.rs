use super::*;
use crate::gnn::{gnn_run, Activation, Dense, Fnn, Gnn, GnnLayer, Side};
use crate::graph::{enumerate_graphs, make_complete_bipartite, random_graph, LabelledGraph, Signal};
use crate::rational::{self, int, ratio, Q};
use alloc::vec;
use alloc::vec::Vec;
use proptest::prelude::*;
use rand::SeedableRng;

fn graphs_upto(max_n: usize, labels: usize) -> impl Iterator<Item = LabelledGraph> {
    (0..=max_n).flat_map(move |n| {
        let e = enumerate_graphs(n, labels, 7).unwrap();
        (0..e.total()).map(move |i| e.graph_at(i))
    })
}

fn random_graphs(count: usize, max_n: usize, labels: usize, seed: u64) -> Vec<LabelledGraph> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_graph(&mut rng, 1 + i % max_n, labels, 0.4)).collect()
}

fn run(net: &Gnn, g: &LabelledGraph) -> Signal {
    gnn_run(net, g, &Signal::from_labels(g)).unwrap()
}

fn deviation(a: &Signal, b: &Signal) -> Q {
    (0..a.len()).map(|v| rational::vec_sub_abs_max(a.row(v), b.row(v))).fold(Q::from_integer(0.into()), |x, y| if y > x { y } else { x })
}

fn dense(w: &[&[i64]], b: &[i64], act: Activation) -> Dense {
    Dense::from_ints(w, b, act).unwrap()
}

fn fnn(input: usize, layers: Vec<Dense>) -> Fnn {
    Fnn::new(input, layers).unwrap()
}

fn small_q() -> impl Strategy<Value = Q> {
    (-3i64..=3, 1i64..=2).prop_map(|(a, b)| ratio(a, b))
}

fn arb_dense(rows: usize, cols: usize, act: Option<Activation>) -> impl Strategy<Value = Dense> {
    (prop::collection::vec(prop::collection::vec(small_q(), cols), rows), prop::collection::vec(small_q(), rows), any::<bool>()).prop_map(
        move |(w, b, relu)| {
            let act = act.unwrap_or(if relu { Activation::Relu } else { Activation::Id });
            Dense::new(w, b, cols, act).unwrap()
        },
    )
}

fn arb_side1_layer(p: usize, q: usize) -> impl Strategy<Value = GnnLayer> {
    let agg = prop_oneof![Just(Aggregation::Sum), Just(Aggregation::Mean), Just(Aggregation::Max)];
    (arb_dense(2, p, None), agg, arb_dense(q, p + 2, None))
        .prop_map(move |(m, agg, c)| GnnLayer::new(Side::One, fnn(p, vec![m]), agg, fnn(p + 2, vec![c])).unwrap())
}

fn arb_linear_mean_layer(p: usize, q: usize) -> impl Strategy<Value = GnnLayer> {
    (arb_dense(2, 2 * p, Some(Activation::Id)), arb_dense(q, p + 2, None))
        .prop_map(move |(m, c)| GnnLayer::new(Side::Two, fnn(2 * p, vec![m]), Aggregation::Mean, fnn(p + 2, vec![c])).unwrap())
}

#[test]
fn identity_messages_on_q1_like_first_layer() {
    // constant message 1 summed: the degree; then relu(deg - 2)
    let l1 = GnnLayer::new(
        Side::One,
        Fnn::constant(1, vec![int(1)]),
        Aggregation::Sum,
        fnn(2, vec![dense(&[&[0, 1]], &[-2], Activation::Relu)]),
    )
    .unwrap();
    let net = Gnn::new(1, vec![l1]).unwrap();
    let norm = normalize_identity_messages(&net).unwrap();
    assert_eq!(norm.layers().len(), 2);
    assert!(norm.layers().iter().all(|l| l.msg().is_identity() && l.side() == Side::One));
    for m in 0..=6 {
        for n in 0..=6 {
            let g = make_complete_bipartite(m, n).with_labels(1, vec![vec![false]; m + n]).unwrap();
            assert_eq!(run(&net, &g), run(&norm, &g));
        }
    }
}

#[test]
fn identity_messages_reject_side_two() {
    let l = GnnLayer::new(Side::Two, Fnn::identity(2), Aggregation::Sum, Fnn::identity(3)).unwrap();
    let net = Gnn::new(1, vec![l]).unwrap();
    assert_eq!(normalize_identity_messages(&net).unwrap_err(), CompileError::SideTwoLayer(1));
}

#[test]
fn linear_mean_projection_to_sender() {
    // msg(x, x') = x', comb(x, s) = x + 2s
    let l = GnnLayer::new(
        Side::Two,
        Fnn::select(2, &[1]),
        Aggregation::Mean,
        Fnn::affine(vec![vec![int(1), int(2)]], vec![int(0)], 2).unwrap(),
    )
    .unwrap();
    let net = Gnn::new(1, vec![l]).unwrap();
    let pulled = pull_linear_mean(&net).unwrap();
    assert_eq!(pulled.side(), Side::One);
    for g in graphs_upto(4, 1) {
        assert_eq!(run(&net, &g), run(&pulled, &g));
    }
}

#[test]
fn linear_mean_constant_messages_and_isolated_vertices() {
    // A = 0: messages are the constant 3 unless the neighbourhood is empty
    let l = GnnLayer::new(
        Side::Two,
        Fnn::constant(2, vec![int(3)]),
        Aggregation::Mean,
        Fnn::affine(vec![vec![int(0), int(1)]], vec![int(0)], 2).unwrap(),
    )
    .unwrap();
    let net = Gnn::new(1, vec![l]).unwrap();
    let pulled = pull_linear_mean(&net).unwrap();
    let g = LabelledGraph::new(3, 1, &[(0, 1)], vec![vec![true], vec![false], vec![true]]).unwrap();
    let out = run(&pulled, &g);
    assert_eq!(out.rows(), &[vec![int(3)], vec![int(3)], vec![int(0)]]);
    assert_eq!(out, run(&net, &g));
}

#[test]
fn linear_mean_preconditions() {
    let relu_msg = GnnLayer::new(Side::Two, fnn(2, vec![dense(&[&[1, 1]], &[0], Activation::Relu)]), Aggregation::Mean, Fnn::identity(2))
        .unwrap();
    let net = Gnn::new(1, vec![relu_msg]).unwrap();
    assert_eq!(pull_linear_mean(&net).unwrap_err(), CompileError::NonlinearMessage(1));
    let sum = GnnLayer::new(Side::Two, Fnn::select(2, &[1]), Aggregation::Sum, Fnn::identity(2)).unwrap();
    let net = Gnn::new(1, vec![sum]).unwrap();
    assert!(matches!(pull_linear_mean(&net), Err(CompileError::Aggregation { layer: 1, .. })));
}

fn max_neighbour_label() -> Gnn {
    let l = GnnLayer::new(Side::Two, Fnn::select(2, &[1]), Aggregation::Max, Fnn::select(2, &[1])).unwrap();
    Gnn::new(1, vec![l]).unwrap()
}

/// msg(x, y) = (relu(y - x), x + y), comb(x, s) = (x + s₁ - s₂/2, relu(s₂ - 1))
/// then a second MAX layer on the two-dimensional state.
fn two_layer_max() -> Gnn {
    let msg = fnn(2, vec![dense(&[&[-1, 1], &[1, 1]], &[0, 0], Activation::Relu)]);
    let comb = fnn(
        3,
        vec![Dense::new(
            vec![vec![int(1), int(1), ratio(-1, 2)], vec![int(0), int(0), int(1)]],
            vec![int(0), int(-1)],
            3,
            Activation::Id,
        )
        .unwrap()],
    );
    let l1 = GnnLayer::new(Side::Two, msg, Aggregation::Max, comb).unwrap();
    let msg2 = fnn(4, vec![dense(&[&[1, 0, -1, 1]], &[0], Activation::Relu)]);
    let comb2 = fnn(3, vec![dense(&[&[1, -1, 2]], &[0], Activation::Id)]);
    let l2 = GnnLayer::new(Side::Two, msg2, Aggregation::Max, comb2).unwrap();
    Gnn::new(1, vec![l1, l2]).unwrap()
}

#[test]
fn reachable_values_examples() {
    let net = max_neighbour_label();
    let d0 = reachable_values_max(&net, 1, 0, 16).unwrap();
    assert_eq!(d0.values, vec![vec![int(0)], vec![int(1)]]);
    assert!(!d0.over_approx);
    let d1 = reachable_values_max(&net, 1, 1, 16).unwrap();
    assert_eq!(d1.values, vec![vec![int(0)], vec![int(1)]]);
    let wide = Gnn::new(3, vec![]).unwrap();
    assert_eq!(
        reachable_values_max(&wide, 3, 0, 4).unwrap_err(),
        CompileError::CapExceeded { what: "value set", projected: 8, cap: 4 }
    );
}

#[test]
fn max_compilation_is_exact() {
    for net in [max_neighbour_label(), two_layer_max()] {
        let c = compile_max_2to1(&net, DEFAULT_VALUE_SET_CAP).unwrap();
        assert_eq!(c.gnn.side(), Side::One);
        assert!(c.gnn.layers().iter().all(|l| l.msg().is_identity()));
        for g in graphs_upto(4, 1) {
            assert_eq!(run(&net, &g), run(&c.gnn, &g));
        }
    }
}

#[test]
fn max_compilation_cap() {
    let err = compile_max_2to1(&two_layer_max(), 8).unwrap_err();
    assert!(matches!(err, CompileError::CapExceeded { .. }));
}

fn mean_depth_one() -> Gnn {
    // msg(x, y) = relu(y - x) + y/2, comb(x, s) = relu(2s - x) - relu(2s - x - 1)
    let msg = fnn(
        2,
        vec![
            Dense::new(vec![vec![int(-1), int(1)], vec![int(0), ratio(1, 2)]], vec![int(0), int(0)], 2, Activation::Relu).unwrap(),
            dense(&[&[1, 1]], &[0], Activation::Id),
        ],
    );
    let comb = fnn(2, vec![dense(&[&[-1, 2], &[-1, 2]], &[0, -1], Activation::Relu), dense(&[&[1, -1]], &[0], Activation::Id)]);
    Gnn::new(1, vec![GnnLayer::new(Side::Two, msg, Aggregation::Mean, comb).unwrap()]).unwrap()
}

#[test]
fn proportion_grid_cardinality() {
    for (n, a) in [(1usize, 1usize), (2, 4), (3, 3), (4, 5)] {
        let g = ProportionGrid::new(n, a, 10_000).unwrap();
        let expect = super::mean::tests_binomial(n + a - 1, n - 1);
        assert_eq!(g.len() as u128, expect);
        for p in &g.points {
            assert_eq!(p.iter().cloned().sum::<Q>(), int(1));
            assert!(p.iter().all(|v| *v >= int(0)));
        }
    }
    assert!(matches!(ProportionGrid::new(6, 40, 100), Err(CompileError::CapExceeded { .. })));
}

#[test]
fn mean_depth_one_is_exact_on_the_grid_and_graphs() {
    let net = mean_depth_one();
    let c = compile_mean_2to1(&net, &MeanOptions::new(ratio(1, 8))).unwrap();
    assert_eq!(c.error_bound(), int(0));
    // comb' on one-hot × S_{2,1/4} equals comb(x, Msg·p)
    let comb = c.gnn.layers()[1].comb();
    let cube = boolean_cube(1);
    let grid = ProportionGrid::new(2, 4, 100).unwrap();
    for (j, x) in cube.iter().enumerate() {
        for prop in &grid.points {
            let mut input = one_hot(2, j);
            input.extend(prop.iter().cloned());
            let l = &net.layers()[0];
            let mut agg = int(0);
            for (k, y) in cube.iter().enumerate() {
                agg += &prop[k] * &message(l, x, y).unwrap()[0];
            }
            let expect = l.comb().eval(&[x[0].clone(), agg]).unwrap();
            assert_eq!(comb.eval(&input).unwrap(), expect);
        }
    }
    for g in graphs_upto(4, 1) {
        assert_eq!(deviation(&run(&net, &g), &run(&c.gnn, &g)), int(0));
    }
}

/// Depth-2 network with a scalar intermediate state in [0, 1].
fn mean_depth_two() -> Gnn {
    let msg1 = Fnn::select(2, &[1]);
    let comb1 = fnn(2, vec![Dense::new(vec![vec![ratio(1, 2), ratio(1, 2)]], vec![int(0)], 2, Activation::Id).unwrap()]);
    let l1 = GnnLayer::new(Side::Two, msg1, Aggregation::Mean, comb1).unwrap();
    let msg2 = fnn(2, vec![dense(&[&[-1, 1]], &[0], Activation::Relu)]);
    let comb2 = fnn(2, vec![Dense::new(vec![vec![ratio(1, 2), int(1)]], vec![int(0)], 2, Activation::Id).unwrap()]);
    let l2 = GnnLayer::new(Side::Two, msg2, Aggregation::Mean, comb2).unwrap();
    Gnn::new(1, vec![l1, l2]).unwrap()
}

#[test]
fn mean_depth_two_stays_within_eps() {
    let net = mean_depth_two();
    let eps = ratio(1, 4);
    let c = compile_mean_2to1(&net, &MeanOptions::new(eps.clone())).unwrap();
    assert!(c.error_bound() < eps);
    assert_eq!(c.gnn.layers().len(), 3);
    let mut worst = int(0);
    for g in graphs_upto(3, 1).chain(random_graphs(20, 7, 1, 5)) {
        let d = deviation(&run(&net, &g), &run(&c.gnn, &g));
        assert!(d <= c.error_bound(), "deviation {d} on {g:?}");
        if d > worst {
            worst = d;
        }
    }
    assert!(worst < eps);
}

#[test]
fn mean_rejects_unsupported_shapes() {
    let mut layers = mean_depth_two().layers().to_vec();
    layers.push(layers[1].clone());
    let deep = Gnn::new(1, layers).unwrap();
    assert!(matches!(compile_mean_2to1(&deep, &MeanOptions::new(ratio(1, 8))), Err(CompileError::Shape(_))));
    let wide = Gnn::new(1, vec![GnnLayer::new(Side::Two, Fnn::select(2, &[1]), Aggregation::Mean, Fnn::identity(2)).unwrap()]).unwrap();
    let l2 = GnnLayer::new(Side::Two, Fnn::select(4, &[2]), Aggregation::Mean, Fnn::select(3, &[2])).unwrap();
    let two_dim = Gnn::new(1, vec![wide.layers()[0].clone(), l2]).unwrap();
    assert!(matches!(compile_mean_2to1(&two_dim, &MeanOptions::new(ratio(1, 8))), Err(CompileError::Shape(_))));
    assert!(matches!(compile_mean_2to1(&max_neighbour_label(), &MeanOptions::new(ratio(1, 8))), Err(CompileError::Aggregation { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalisation_preserves_outputs(a in arb_side1_layer(1, 2), b in arb_side1_layer(2, 1)) {
        let net = Gnn::new(1, vec![a, b]).unwrap();
        let norm = normalize_identity_messages(&net).unwrap();
        prop_assert_eq!(norm.layers().len(), 3);
        for g in graphs_upto(3, 1).chain(random_graphs(10, 10, 1, 3)) {
            prop_assert_eq!(run(&net, &g), run(&norm, &g));
        }
    }

    #[test]
    fn pulled_mean_preserves_outputs(a in arb_linear_mean_layer(1, 2), b in arb_linear_mean_layer(2, 1)) {
        let net = Gnn::new(1, vec![a, b]).unwrap();
        let pulled = pull_linear_mean(&net).unwrap();
        for g in graphs_upto(3, 1).chain(random_graphs(10, 10, 1, 4)) {
            prop_assert_eq!(run(&net, &g), run(&pulled, &g));
        }
    }

    #[test]
    fn mean_depth_one_random_networks_are_exact(m in arb_dense(2, 2, None), c in arb_dense(1, 3, None)) {
        let l = GnnLayer::new(Side::Two, fnn(2, vec![m]), Aggregation::Mean, fnn(3, vec![c])).unwrap();
        let net = Gnn::new(1, vec![l]).unwrap();
        let comp = compile_mean_2to1(&net, &MeanOptions::new(ratio(1, 8))).unwrap();
        for g in graphs_upto(3, 1).chain(random_graphs(10, 9, 1, 6)) {
            prop_assert_eq!(run(&net, &g), run(&comp.gnn, &g));
        }
    }
}
