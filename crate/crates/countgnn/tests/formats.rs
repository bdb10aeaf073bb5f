mod common;

use countgnn::formats::{read_gnn, read_graph, read_graphs, read_signal, write_gnn, write_graph, write_signal};
use countgnn_core::graph::{random_graph, LabelledGraph, Signal};
use countgnn_core::lab::{adversarial_candidates, build_q1_2gnn, random_1gnn};
use countgnn_core::rational::ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_graph() -> impl Strategy<Value = LabelledGraph> {
    (0usize..9, 0usize..3, any::<u64>()).prop_map(|(n, l, seed)| random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, l, 0.4))
}

fn arb_signal() -> impl Strategy<Value = Signal> {
    (0usize..6, 0usize..4).prop_flat_map(|(n, d)| {
        prop::collection::vec(prop::collection::vec((-50i64..50, 1i64..20).prop_map(|(a, b)| ratio(a, b)), d), n)
            .prop_map(move |rows| Signal::new(d, rows).unwrap())
    })
}

proptest! {
    #[test]
    fn graphs_round_trip(g in arb_graph()) {
        prop_assert_eq!(read_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn graph_documents_concatenate(a in arb_graph(), b in arb_graph()) {
        let text = format!("{}\n# next\n{}", write_graph(&a), write_graph(&b));
        prop_assert_eq!(read_graphs(&text).unwrap(), vec![a, b]);
    }

    #[test]
    fn signals_round_trip(s in arb_signal()) {
        prop_assert_eq!(read_signal(&write_signal(&s)).unwrap(), s);
    }

    #[test]
    fn random_networks_round_trip(seed in any::<u64>()) {
        let net = random_1gnn(&mut ChaCha8Rng::seed_from_u64(seed), 4, 5);
        prop_assert_eq!(read_gnn(&write_gnn(&net)).unwrap(), net);
    }
}

#[test]
fn desk_networks_round_trip() {
    let mut nets = vec![build_q1_2gnn()];
    nets.extend(adversarial_candidates(6).into_iter().map(|(_, n)| n));
    for list in [common::idmsg_networks(), common::linmean_networks(), common::max_networks(), common::mean_networks()] {
        nets.extend(list.into_iter().map(|(_, n)| n));
    }
    for net in nets {
        let text = write_gnn(&net);
        assert_eq!(read_gnn(&text).unwrap(), net, "{text}");
        assert_eq!(write_gnn(&read_gnn(&text).unwrap()), text);
    }
}

#[test]
fn truncated_network_is_rejected() {
    let text = write_gnn(&build_q1_2gnn());
    let cut: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
    assert!(read_gnn(&cut).is_err());
}
