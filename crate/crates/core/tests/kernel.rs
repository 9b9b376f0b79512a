use edgecolor_core::oracle::{self, corpus};
use edgecolor_core::{greedy_partial_color, replay, ChainKind, Multigraph, PartialColoring, VertexSet};
use proptest::prelude::*;

fn instance(index: usize) -> Multigraph {
    let all = corpus(30);
    all[index % all.len()].2.clone()
}

fn start(graph: &Multigraph) -> PartialColoring {
    greedy_partial_color(graph, graph.max_degree() + 1).0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_swaps_stay_proper(index in 0usize..1000, moves in prop::collection::vec((0usize..10, 1usize..12, 1usize..12), 1..60)) {
        let g = instance(index);
        let mut phi = start(&g);
        let initial = phi.clone();
        let k = phi.k();
        for (v, a, b) in moves {
            let (v, a, b) = (v % g.vertex_count(), (a - 1) % k + 1, (b - 1) % k + 1);
            if a == b {
                continue;
            }
            let before = phi.clone();
            let comp = phi.component(&g, v, a, b).unwrap();
            phi.swap(&g, &comp).unwrap();
            prop_assert!(phi.validate(&g).is_ok());
            prop_assert!(oracle::is_proper(&g, phi.assignment(), k));
            for x in 0..g.vertex_count() {
                if before.missing(x) != phi.missing(x) {
                    prop_assert!(comp.kind == ChainKind::Path && comp.has_end(x));
                }
            }
            let mut back = phi.clone();
            back.swap_at(&g, comp.start, a, b).unwrap();
            prop_assert_eq!(back.assignment(), before.assignment());
        }
        let replayed = replay(&g, &initial, phi.log()).unwrap();
        prop_assert_eq!(replayed.assignment(), phi.assignment());
    }

    #[test]
    fn outside_swaps_keep_the_boundary(index in 0usize..1000, mask in any::<u16>(), a in 1usize..12, b in 1usize..12) {
        let g = instance(index);
        let mut phi = start(&g);
        let k = phi.k();
        let (a, b) = ((a - 1) % k + 1, (b - 1) % k + 1);
        prop_assume!(a != b);
        let inside = VertexSet::from_iter(g.vertex_count(), (0..g.vertex_count()).filter(|v| mask >> v & 1 == 1));
        let before = phi.clone();
        match phi.swap_outside(&g, &inside, a, b) {
            Ok(()) => {
                prop_assert!(oracle::is_proper(&g, phi.assignment(), k));
                for e in g.boundary(&inside) {
                    prop_assert_eq!(phi.color(e), before.color(e));
                }
                for e in 0..g.edge_count() {
                    let (u, v) = g.ends(e);
                    if inside.contains(u) || inside.contains(v) {
                        prop_assert_eq!(phi.color(e), before.color(e));
                    }
                }
            }
            Err(_) => prop_assert_eq!(phi.assignment(), before.assignment()),
        }
    }
}

#[test]
fn clash_names_both_edges() {
    let g = Multigraph::new(3, &[(0, 1), (1, 2)]).unwrap();
    let err = PartialColoring::from_assignment(&g, 2, &[1, 1]).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("edges 0 and 1"), "{msg}");
}

#[test]
fn greedy_output_is_valid_on_corpus() {
    for (_, _, g) in corpus(30) {
        let (phi, queue) = greedy_partial_color(&g, g.max_degree() + 1);
        phi.validate(&g).unwrap();
        for e in queue {
            assert!(phi.color(e).is_none());
        }
    }
}
