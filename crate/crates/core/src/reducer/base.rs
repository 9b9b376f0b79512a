use std::collections::{HashSet, VecDeque};

use crate::coloring::{Color, PartialColoring};
use crate::exchange::{stress, Engine, Stress};
use crate::forest::{closure, first_nonelementary, OrderedTree};
use crate::graph::{EdgeId, Multigraph};

/// Colorings explored when no single exchange helps the augmentation.
pub const AUGMENT_BUDGET: usize = 200_000;

/// Base size below which the free trunk palette is not guaranteed.
pub const SMALL_BASE: usize = 7;

/// Colorings explored by the small-base search.
pub const SMALL_BASE_BUDGET: usize = 10_000;

/// Length of the shortest non-elementary prefix of the closure of `g`, or
/// `None` when the closure is elementary.
fn collision(graph: &Multigraph, phi: &PartialColoring, g: EdgeId) -> Option<usize> {
    let tree = closure(graph, phi, OrderedTree::rooted(graph, g));
    first_nonelementary(phi, &tree)
}

/// Breadth-first search over single Kempe swaps from `start`.
///
/// Swaps are the chains through a vertex that misses one of the two colors.
/// At most `budget` distinct colorings are generated. Returns the first
/// coloring satisfying `goal`.
pub fn kempe_search(
    graph: &Multigraph,
    start: &PartialColoring,
    budget: usize,
    goal: impl FnMut(&PartialColoring) -> bool,
) -> Option<PartialColoring> {
    kempe_search_within(graph, start, budget, |_| true, goal)
}

/// [`kempe_search`] that only expands colorings accepted by `keep`.
pub fn kempe_search_within(
    graph: &Multigraph,
    start: &PartialColoring,
    budget: usize,
    mut keep: impl FnMut(&PartialColoring) -> bool,
    mut goal: impl FnMut(&PartialColoring) -> bool,
) -> Option<PartialColoring> {
    let start = start.detached();
    if goal(&start) {
        return Some(start);
    }
    let k = start.k();
    let mut seen: HashSet<Vec<Color>> = HashSet::new();
    seen.insert(start.assignment().to_vec());
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        for x in 0..graph.vertex_count() {
            for a in cur.missing(x).iter() {
                for b in 1..=k {
                    if b == a || cur.is_missing(x, b) {
                        continue;
                    }
                    let mut next = cur.clone();
                    if next.swap_at(graph, x, a, b).is_err() {
                        continue;
                    }
                    if !seen.insert(next.assignment().to_vec()) {
                        continue;
                    }
                    if goal(&next) {
                        return Some(next);
                    }
                    if seen.len() >= budget {
                        return None;
                    }
                    if keep(&next) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    None
}

/// Color `g` when the closure of `g` is not elementary.
///
/// Repeatedly applies a single Kempe swap at a tree vertex that shortens
/// the shortest non-elementary prefix of the closure, until both ends of
/// `g` miss a common color. A bounded search covers the rare case where no
/// single swap helps.
pub fn base_augment(
    eng: &mut Engine<'_>,
    phi: &PartialColoring,
    g: EdgeId,
) -> Result<PartialColoring, Stress> {
    const SITE: &str = "base-augment";
    let graph = eng.graph;
    let (u, v) = graph.ends(g);
    if phi.color(g).is_some() {
        return Err(stress(SITE, "edge is already colored"));
    }
    let mut cur = phi.clone();
    let mut len = collision(graph, &cur, g)
        .ok_or_else(|| stress(SITE, "closure of the edge is elementary"))?;
    for _ in 0..=graph.edge_count() * graph.vertex_count() {
        if let Some(c) = cur.common_missing(u, v) {
            cur.assign(graph, g, c)?;
            return Ok(cur);
        }
        eng.tick(SITE)?;
        let tree = closure(graph, &cur, OrderedTree::rooted(graph, g)).prefix(len);
        let mut improved = None;
        'search: for &x in tree.vertices().iter().rev() {
            for a in cur.missing(x).iter() {
                for b in 1..=cur.k() {
                    if b == a || cur.is_missing(x, b) {
                        continue;
                    }
                    let mut next = cur.clone();
                    next.swap_at(graph, x, a, b)?;
                    if let Some(l) = collision(graph, &next, g) {
                        if l < len {
                            improved = Some((next, l));
                            break 'search;
                        }
                    }
                }
            }
        }
        let (next, l) = match improved {
            Some(found) => found,
            None => {
                let found = kempe_search_within(
                    graph,
                    &cur,
                    AUGMENT_BUDGET,
                    |c| collision(graph, c, g).is_some_and(|l| l <= len),
                    |c| collision(graph, c, g).is_some_and(|l| l < len),
                )
                .ok_or_else(|| stress(SITE, "no exchange shortens the colliding prefix"))?;
                let l = collision(graph, &found, g).unwrap();
                let mut replayed = cur.clone();
                for op in found.log() {
                    replayed.apply(graph, op)?;
                }
                (replayed, l)
            }
        };
        cur = next;
        len = l;
    }
    Err(stress(SITE, "augmentation did not terminate"))
}

/// When the closure of `g` is elementary but small, search for a Kempe
/// equivalent coloring whose closure is not elementary and color `g`.
///
/// `Ok(None)` means the base is large enough for the reduction cascade.
pub fn small_base_eliminate(
    eng: &mut Engine<'_>,
    phi: &PartialColoring,
    g: EdgeId,
) -> Result<Option<PartialColoring>, Stress> {
    const SITE: &str = "small-base";
    let graph = eng.graph;
    let tree = closure(graph, phi, OrderedTree::rooted(graph, g));
    if tree.vertices().len() >= SMALL_BASE {
        return Ok(None);
    }
    let found = kempe_search(graph, phi, SMALL_BASE_BUDGET, |c| collision(graph, c, g).is_some())
        .ok_or_else(|| stress(SITE, "search budget exhausted with an elementary base"))?;
    let mut replayed = phi.clone();
    for op in found.log() {
        replayed.apply(graph, op)?;
    }
    base_augment(eng, &replayed, g).map(Some)
}
