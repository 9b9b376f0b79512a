use edgecolor_core::format::{
    parse_coloring, parse_graph, parse_log, parse_witnesses, write_coloring, write_graph, write_log,
    write_witness,
};
use edgecolor_core::oracle::{corpus, fixtures};
use edgecolor_core::{color_multigraph, DriverConfig, DriverError, Mode, Multigraph};
use proptest::prelude::*;

#[test]
fn corpus_round_trips_bit_exact() {
    for (_, _, g) in corpus(usize::MAX) {
        let text = write_graph(&g);
        let back = parse_graph(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(write_graph(&back), text);
    }
}

#[test]
fn coloring_and_log_round_trip() {
    let g = fixtures::petersen();
    let run = color_multigraph(&g, &DriverConfig::default()).unwrap();
    assert_eq!(parse_coloring(&write_coloring(&run.colors), &g).unwrap(), run.colors);
    assert_eq!(parse_log(&write_log(&run.log)).unwrap(), run.log);
}

#[test]
fn strict_witness_parses_and_verifies() {
    let g = fixtures::shannon(2);
    let cfg = DriverConfig {
        mode: Mode::Strict,
        k_override: Some(5),
        ..Default::default()
    };
    let Err(DriverError::Insufficient { witness, .. }) = color_multigraph(&g, &cfg) else {
        panic!("expected a witness");
    };
    let parsed = parse_witnesses(&write_witness(&witness), &g).unwrap();
    assert_eq!(parsed, vec![witness]);
    assert!(parse_witnesses("w refuted=6 vertices=0,1,2\n", &g).is_err());
}

proptest! {
    #[test]
    fn random_graphs_round_trip(n in 2usize..12, pairs in prop::collection::vec((0usize..12, 0usize..12), 0..40)) {
        let edges: Vec<_> = pairs.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u != v).collect();
        let g = Multigraph::new(n, &edges).unwrap();
        prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }
}
