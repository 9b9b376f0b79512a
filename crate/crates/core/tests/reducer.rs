use edgecolor_core::exchange::Engine;
use edgecolor_core::forest::{closure, first_nonelementary, OrderedTree};
use edgecolor_core::oracle::{self, corpus, fixtures, ReachOutcome, KEMPE_REACH_BUDGET};
use edgecolor_core::reducer::{base_augment, small_base_eliminate};
use edgecolor_core::{greedy_partial_color, replay, Multigraph, PartialColoring};

fn colorable_after_swaps(g: &Multigraph, colors: &[usize], k: usize, e: usize) -> bool {
    let found = oracle::kempe_reach_search(g, colors, k, KEMPE_REACH_BUDGET, |c| {
        let mut c = c.to_vec();
        (1..=k).any(|x| {
            c[e] = x;
            oracle::is_proper(g, &c, k)
        })
    });
    matches!(found, ReachOutcome::Found { .. })
}

#[test]
fn small_base_on_a_triangle() {
    let (g, colors, k) = fixtures::k3a();
    assert!(colorable_after_swaps(&g, &colors, k, 0));
    let phi = PartialColoring::from_assignment(&g, k, &colors).unwrap();
    let mut eng = Engine::new(&g);
    let out = small_base_eliminate(&mut eng, &phi, 0).unwrap().unwrap();
    assert!(out.is_complete());
    out.validate(&g).unwrap();
}

#[test]
fn base_augment_colors_nonelementary_closures() {
    let mut calls = 0;
    for (_, _, g) in corpus(30) {
        let (phi, queue) = greedy_partial_color(&g, g.max_degree() + 1);
        for &e in &queue {
            let tree = closure(&g, &phi, OrderedTree::rooted(&g, e));
            if first_nonelementary(&phi, &tree).is_none() {
                continue;
            }
            calls += 1;
            let mut eng = Engine::new(&g);
            let out = base_augment(&mut eng, &phi, e).unwrap();
            assert!(out.color(e).is_some());
            out.validate(&g).unwrap();
            assert_eq!(out.colored_count(), phi.colored_count() + 1);
            assert_eq!(replay(&g, &phi, out.log()).unwrap(), out);
        }
    }
    assert!(calls > 0);
}
