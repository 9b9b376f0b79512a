use std::collections::BTreeSet;

use edgecolor_core::forest::check::Snapshot;
use edgecolor_core::forest::{closure, closure_with_order, is_closed, OrderedTree};
use edgecolor_core::oracle::{corpus, tight};
use edgecolor_core::{greedy_partial_color, EdgeId, Multigraph, PartialColoring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A greedy coloring at `max degree + 1` with at least one uncolored edge.
pub fn with_gap(graph: &Multigraph) -> (PartialColoring, EdgeId) {
    let k = graph.max_degree() + 1;
    let (phi, queue) = greedy_partial_color(graph, k);
    match queue.front() {
        Some(&e) => (phi, e),
        None => {
            let e = graph.edge_count() - 1;
            let mut colors = phi.assignment().to_vec();
            colors[e] = 0;
            (PartialColoring::from_assignment(graph, k, &colors).unwrap(), e)
        }
    }
}

fn instances() -> Vec<Multigraph> {
    let mut out: Vec<Multigraph> = corpus(30).into_iter().step_by(41).map(|(_, _, g)| g).collect();
    out.extend((0..8).map(tight));
    out.truncate(20);
    out
}

#[test]
fn closure_is_independent_of_order() {
    let graphs = instances();
    assert_eq!(graphs.len(), 20);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in &graphs {
        let (phi, e) = with_gap(g);
        let (u, v) = g.ends(e);
        let snap = Snapshot::new(g, phi.assignment(), phi.k());
        let expected = snap.closure(&BTreeSet::from([u, v]));
        let canonical = closure(g, &phi, OrderedTree::rooted(g, e));
        assert!(is_closed(g, &phi, &canonical));
        for _ in 0..100 {
            let t = closure_with_order(g, &phi, OrderedTree::rooted(g, e), |c| rng.gen_range(0..c.len()));
            let got: BTreeSet<_> = t.vertices().iter().copied().collect();
            assert_eq!(got, expected);
        }
    }
}
