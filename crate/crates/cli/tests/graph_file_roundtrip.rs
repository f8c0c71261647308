use proptest::prelude::*;
use twoconn::graph_file::{parse_graph, render_graph};
use twoconn_core::graph::{figure1, generate_clustered, generate_random_connected};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_graphs_round_trip(n in 1..30usize, extra in 0..40usize, seed: u64) {
        let extra = extra.min(n * (n - 1) / 2 + 1 - n);
        let g = generate_random_connected(n, extra, seed).unwrap();
        let text = render_graph(&g);
        prop_assert_eq!(parse_graph(&text).unwrap(), g);
        prop_assert_eq!(render_graph(&parse_graph(&text).unwrap()), text);
    }

    #[test]
    fn clustered_graphs_round_trip(k in 1..6usize, s in 3..6usize, seed: u64) {
        let g = generate_clustered(k, s, seed).unwrap();
        prop_assert_eq!(parse_graph(&render_graph(&g)).unwrap(), g);
    }

    #[test]
    fn parser_never_panics(text in "[0-9 #:a-z\n]{0,80}") {
        let _ = parse_graph(&text);
    }
}

#[test]
fn fixture_is_figure1() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/data/figure1.txt"
    ))
    .unwrap();
    let g = parse_graph(&text).unwrap();
    assert_eq!((g.n(), g.m()), (16, 20));
    assert_eq!(g, figure1());
}
