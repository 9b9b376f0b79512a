//! Reference answers for small instances: exact chromatic index, exact
//! density, exhaustive Kempe reachability, and the instance generator.
//!
//! Nothing here uses the coloring engine. The only input taken from the
//! rest of the crate is the edge list of a [`Multigraph`].

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Multigraph, Vertex};

/// Largest edge count accepted by [`chromatic_index_exact`].
pub const CHROMATIC_INDEX_EDGE_CAP: usize = 30;

/// Largest vertex count accepted by [`gamma_exact`].
pub const GAMMA_VERTEX_CAP: usize = 20;

/// Colorings explored by [`kempe_reach_search`] by default.
pub const KEMPE_REACH_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {edges} edges, the exact search accepts at most {cap}")]
    TooManyEdges { edges: usize, cap: usize },
    #[error("graph has {vertices} vertices, the exact search accepts at most {cap}")]
    TooManyVertices { vertices: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub chromatic_index: usize,
    pub gamma: usize,
    pub delta: usize,
    /// `max(delta + 1, gamma)`.
    pub bound: usize,
    /// An odd vertex set attaining `gamma`, if the graph has one.
    pub witness: Option<Vec<Vertex>>,
}

pub fn report(graph: &Multigraph) -> Result<OracleReport, OracleError> {
    let (gamma, witness) = gamma_exact(graph)?;
    let delta = max_degree(graph);
    Ok(OracleReport {
        chromatic_index: chromatic_index_exact(graph)?,
        gamma,
        delta,
        bound: (delta + 1).max(gamma),
        witness,
    })
}

fn degrees(graph: &Multigraph) -> Vec<usize> {
    let mut deg = vec![0; graph.vertex_count()];
    for &(u, v) in graph.edges() {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg
}

pub fn max_degree(graph: &Multigraph) -> usize {
    degrees(graph).into_iter().max().unwrap_or(0)
}

/// Maximum of `ceil(2|E(H)| / (|V(H)| - 1))` over odd vertex sets of size at
/// least 3, by enumerating every subset. Zero when there is no such set.
pub fn gamma_exact(graph: &Multigraph) -> Result<(usize, Option<Vec<Vertex>>), OracleError> {
    let n = graph.vertex_count();
    if n > GAMMA_VERTEX_CAP {
        return Err(OracleError::TooManyVertices {
            vertices: n,
            cap: GAMMA_VERTEX_CAP,
        });
    }
    let masks: Vec<u32> = graph
        .edges()
        .iter()
        .map(|&(u, v)| (1u32 << u) | (1u32 << v))
        .collect();
    let mut best = (0usize, None::<u32>);
    for set in 0u32..(1u32 << n) {
        let size = set.count_ones() as usize;
        if size < 3 || size % 2 == 0 {
            continue;
        }
        let inside = masks.iter().filter(|&&m| m & set == m).count();
        let value = (2 * inside).div_ceil(size - 1);
        if value > best.0 {
            best = (value, Some(set));
        }
    }
    let witness = best
        .1
        .map(|set| (0..n).filter(|&v| set >> v & 1 == 1).collect());
    Ok((best.0, witness))
}

/// Exact chromatic index by depth-first search over edge colorings.
///
/// Edges are colored in order of decreasing degree sum. A color may be
/// opened only if it is the next unused one, and every uncolored edge must
/// keep at least one available color.
pub fn chromatic_index_exact(graph: &Multigraph) -> Result<usize, OracleError> {
    let m = graph.edge_count();
    if m > CHROMATIC_INDEX_EDGE_CAP {
        return Err(OracleError::TooManyEdges {
            edges: m,
            cap: CHROMATIC_INDEX_EDGE_CAP,
        });
    }
    if m == 0 {
        return Ok(0);
    }
    let lower = match gamma_exact(graph) {
        Ok((gamma, _)) => gamma.max(max_degree(graph)),
        Err(_) => max_degree(graph),
    };
    let mut k = lower.max(1);
    loop {
        if edge_colorable(graph, k) {
            return Ok(k);
        }
        k += 1;
    }
}

/// Whether the edges can be properly colored with `k` colors.
pub fn edge_colorable(graph: &Multigraph, k: usize) -> bool {
    assert!(k <= 64, "search stores colors in 64-bit masks");
    let deg = degrees(graph);
    if deg.iter().any(|&d| d > k) {
        return false;
    }
    let mut order: Vec<usize> = (0..graph.edge_count()).collect();
    order.sort_by_key(|&e| {
        let (u, v) = graph.edges()[e];
        (std::cmp::Reverse(deg[u] + deg[v]), e)
    });
    let mut search = Search {
        ends: order.iter().map(|&e| graph.edges()[e]).collect(),
        used: vec![0u64; graph.vertex_count()],
        left: deg,
        k,
    };
    search.extend(0, 0)
}

struct Search {
    ends: Vec<(Vertex, Vertex)>,
    used: Vec<u64>,
    /// Uncolored incident edges per vertex.
    left: Vec<usize>,
    k: usize,
}

impl Search {
    fn extend(&mut self, i: usize, opened: usize) -> bool {
        if i == self.ends.len() {
            return true;
        }
        let (u, v) = self.ends[i];
        let limit = (opened + 1).min(self.k);
        for c in 0..limit {
            let bit = 1u64 << c;
            if (self.used[u] | self.used[v]) & bit != 0 {
                continue;
            }
            self.used[u] |= bit;
            self.used[v] |= bit;
            self.left[u] -= 1;
            self.left[v] -= 1;
            if self.feasible(i + 1, u, v) && self.extend(i + 1, opened.max(c + 1)) {
                return true;
            }
            self.used[u] &= !bit;
            self.used[v] &= !bit;
            self.left[u] += 1;
            self.left[v] += 1;
        }
        false
    }

    /// Cheap necessary conditions after coloring an edge at `u` and `v`.
    fn feasible(&self, from: usize, u: Vertex, v: Vertex) -> bool {
        for w in [u, v] {
            if self.left[w] > self.k - self.used[w].count_ones() as usize {
                return false;
            }
        }
        let full = if self.k == 64 { u64::MAX } else { (1u64 << self.k) - 1 };
        self.ends[from..].iter().all(|&(a, b)| {
            if a != u && a != v && b != u && b != v {
                return true;
            }
            (self.used[a] | self.used[b]) & full != full
        })
    }
}

/// A Kempe swap on a raw color vector: exchange `a` and `b` on the
/// component of the `a`/`b` subgraph containing `vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSwap {
    pub vertex: Vertex,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReachOutcome {
    /// A reachable coloring satisfying the predicate and the swaps leading to it.
    Found { colors: Vec<usize>, swaps: Vec<RawSwap> },
    /// Every reachable coloring was examined.
    NoneReachable,
    /// The budget ran out first; nothing is claimed.
    Exhausted,
}

/// Apply `swap` to `colors` (0 marks an uncolored edge). Returns `false` if
/// the component through the vertex has no edge.
pub fn apply_raw_swap(graph: &Multigraph, colors: &mut [usize], swap: RawSwap) -> bool {
    let RawSwap { vertex, a, b } = swap;
    let edges = graph.edges();
    let mut seen_vertex = vec![false; graph.vertex_count()];
    let mut component = Vec::new();
    let mut queue = VecDeque::from([vertex]);
    seen_vertex[vertex] = true;
    let mut taken = vec![false; edges.len()];
    while let Some(x) = queue.pop_front() {
        for (e, &(p, q)) in edges.iter().enumerate() {
            if taken[e] || (p != x && q != x) || (colors[e] != a && colors[e] != b) {
                continue;
            }
            taken[e] = true;
            component.push(e);
            let y = if p == x { q } else { p };
            if !seen_vertex[y] {
                seen_vertex[y] = true;
                queue.push_back(y);
            }
        }
    }
    for &e in &component {
        colors[e] = if colors[e] == a { b } else { a };
    }
    !component.is_empty()
}

/// Breadth-first search of the colorings reachable from `start` by Kempe
/// swaps with colors in `1..=k`, examining at most `budget` distinct
/// colorings. Colorings are compared exactly by their per-edge colors.
pub fn kempe_reach_search(
    graph: &Multigraph,
    start: &[usize],
    k: usize,
    budget: usize,
    mut predicate: impl FnMut(&[usize]) -> bool,
) -> ReachOutcome {
    let mut nodes: Vec<(Vec<usize>, Option<(usize, RawSwap)>)> = vec![(start.to_vec(), None)];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start.to_vec(), 0)]);
    let path_to = |nodes: &[(Vec<usize>, Option<(usize, RawSwap)>)], mut i: usize| {
        let mut swaps = Vec::new();
        while let Some((parent, swap)) = nodes[i].1 {
            swaps.push(swap);
            i = parent;
        }
        swaps.reverse();
        swaps
    };
    let mut next = 0;
    while next < nodes.len() {
        let i = next;
        next += 1;
        if predicate(&nodes[i].0) {
            return ReachOutcome::Found {
                colors: nodes[i].0.clone(),
                swaps: path_to(&nodes, i),
            };
        }
        for vertex in 0..graph.vertex_count() {
            for a in 1..=k {
                for b in a + 1..=k {
                    let swap = RawSwap { vertex, a, b };
                    let mut colors = nodes[i].0.clone();
                    if !apply_raw_swap(graph, &mut colors, swap) || index.contains_key(&colors) {
                        continue;
                    }
                    if nodes.len() >= budget {
                        return ReachOutcome::Exhausted;
                    }
                    index.insert(colors.clone(), nodes.len());
                    nodes.push((colors, Some((i, swap))));
                }
            }
        }
    }
    ReachOutcome::NoneReachable
}

/// Whether `colors` is a proper partial coloring with colors in `1..=k`.
pub fn is_proper(graph: &Multigraph, colors: &[usize], k: usize) -> bool {
    let mut seen = vec![0u128; graph.vertex_count()];
    for (&(u, v), &c) in graph.edges().iter().zip(colors) {
        if c == 0 {
            continue;
        }
        if c > k || c > 128 {
            return false;
        }
        let bit = 1u128 << (c - 1);
        if seen[u] & bit != 0 || seen[v] & bit != 0 {
            return false;
        }
        seen[u] |= bit;
        seen[v] |= bit;
    }
    true
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic random multigraph on `n` vertices.
///
/// Pairs `i < j` are visited in lexicographic order; pair number `p` gets
/// multiplicity `h >> 62` where `h = mix(mix(mix(seed) ^ n) ^ p)` and `mix`
/// is the SplitMix64 finalizer. Edges are listed pair by pair.
pub fn gen(n: usize, seed: u64) -> Multigraph {
    assert!(n >= 2, "generator needs at least two vertices");
    let key = splitmix64(splitmix64(seed) ^ n as u64);
    let mut edges = Vec::new();
    let mut p = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let mult = splitmix64(key ^ p) >> 62;
            for _ in 0..mult {
                edges.push((i, j));
            }
            p += 1;
        }
    }
    Multigraph::new(n, &edges).expect("generated edges are valid")
}

/// The generated instances used as the test corpus: `n` in `5..=10`,
/// seeds `1..=200`, at most `max_edges` edges.
pub fn corpus(max_edges: usize) -> Vec<(usize, u64, Multigraph)> {
    let mut out = Vec::new();
    for n in 5..=10 {
        for seed in 1..=200 {
            let g = gen(n, seed);
            if g.edge_count() <= max_edges {
                out.push((n, seed, g));
            }
        }
    }
    out
}

/// Uniform index below `bound` from a SplitMix64 stream.
fn draw(state: &mut u64, bound: usize) -> usize {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    (splitmix64(*state) % bound as u64) as usize
}

fn shuffle<T>(items: &mut [T], state: &mut u64) {
    for i in (1..items.len()).rev() {
        items.swap(i, draw(state, i + 1));
    }
}

fn core_edges(edges: &mut Vec<(Vertex, Vertex)>, offset: usize, c: usize, mu: usize) {
    for i in 0..c {
        for j in i + 1..c {
            for _ in 0..mu {
                edges.push((offset + i, offset + j));
            }
        }
    }
}

/// `c` vertices pairwise joined by `mu` parallel edges, with `mu - 1`
/// pendant edges at every core vertex.
pub fn pendant_core(c: usize, mu: usize) -> Multigraph {
    let mut edges = Vec::new();
    core_edges(&mut edges, 0, c, mu);
    let mut n = c;
    for i in 0..c {
        for _ in 1..mu {
            edges.push((i, n));
            n += 1;
        }
    }
    Multigraph::new(n, &edges).expect("generated edges are valid")
}

/// Two disjoint copies of `c` vertices pairwise joined by `mu` parallel
/// edges, linked by `mu - 1` random perfect matchings, edges listed in
/// random order. Every vertex has degree `mu * c - 1`.
pub fn twin_cores(c: usize, mu: usize, seed: u64) -> Multigraph {
    let mut state = splitmix64(seed ^ 0x7477_696E);
    let mut edges = Vec::new();
    core_edges(&mut edges, 0, c, mu);
    core_edges(&mut edges, c, c, mu);
    for _ in 1..mu {
        let mut perm: Vec<usize> = (0..c).collect();
        shuffle(&mut perm, &mut state);
        edges.extend(perm.iter().enumerate().map(|(i, &j)| (i, c + j)));
    }
    shuffle(&mut edges, &mut state);
    Multigraph::new(2 * c, &edges).expect("generated edges are valid")
}

/// Twin cores with `c` in `{5, 7, 9, 11}` and `mu` in `{2, 3}` chosen by
/// `seed`. Greedy colorings of these leave edges whose trees need stages,
/// levels and phases.
pub fn tight(seed: u64) -> Multigraph {
    let mut state = splitmix64(seed);
    let c = [5, 7, 9, 11][draw(&mut state, 4)];
    let mu = 2 + draw(&mut state, 2);
    twin_cores(c, mu, seed)
}

pub mod fixtures {
    //! Small named graphs.

    use crate::graph::Multigraph;

    pub fn k2() -> Multigraph {
        Multigraph::new(2, &[(0, 1)]).unwrap()
    }

    pub fn k3() -> Multigraph {
        shannon(1)
    }

    pub fn path(n: usize) -> Multigraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Multigraph::new(n, &edges).unwrap()
    }

    /// Triangle `u=0, v=1, w=2` with `uv` uncolored, `vw` colored 1 and
    /// `wu` colored 2, palette 3. Colors are per edge, 0 for uncolored.
    pub fn k3a() -> (Multigraph, Vec<usize>, usize) {
        let g = Multigraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        (g, vec![0, 1, 2], 3)
    }

    /// Triangle with every pair joined by `mu` parallel edges.
    pub fn shannon(mu: usize) -> Multigraph {
        let mut edges = Vec::new();
        for pair in [(0, 1), (1, 2), (0, 2)] {
            edges.extend(std::iter::repeat(pair).take(mu));
        }
        Multigraph::new(3, &edges).unwrap()
    }

    pub fn petersen() -> Multigraph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        Multigraph::new(10, &edges).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn small_chromatic_indices() {
        assert_eq!(chromatic_index_exact(&k2()).unwrap(), 1);
        assert_eq!(chromatic_index_exact(&k3()).unwrap(), 3);
        assert_eq!(chromatic_index_exact(&path(5)).unwrap(), 2);
        assert_eq!(chromatic_index_exact(&shannon(2)).unwrap(), 6);
        assert_eq!(chromatic_index_exact(&petersen()).unwrap(), 4);
    }

    #[test]
    fn petersen_is_not_three_edge_colorable() {
        assert!(!edge_colorable(&petersen(), 3));
        assert!(edge_colorable(&petersen(), 4));
    }

    #[test]
    fn shannon_two_has_a_six_coloring() {
        let g = shannon(2);
        let colors = [1, 2, 3, 4, 5, 6];
        assert!(is_proper(&g, &colors, 6));
    }

    #[test]
    fn densities() {
        assert_eq!(gamma_exact(&shannon(2)).unwrap(), (6, Some(vec![0, 1, 2])));
        assert_eq!(gamma_exact(&petersen()).unwrap().0, 3);
        assert_eq!(gamma_exact(&k2()).unwrap(), (0, None));
    }

    #[test]
    fn k3a_colorable_after_few_swaps() {
        let (g, colors, k) = k3a();
        match kempe_reach_search(&g, &colors, k, KEMPE_REACH_BUDGET, |c| {
            let mut c = c.to_vec();
            (1..=k).any(|x| {
                c[0] = x;
                is_proper(&g, &c, k)
            })
        }) {
            ReachOutcome::Found { swaps, .. } => assert!(swaps.len() <= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shannon_two_at_five_never_colorable() {
        let g = shannon(2);
        let colors = [0, 1, 2, 3, 4, 5];
        let out = kempe_reach_search(&g, &colors, 5, KEMPE_REACH_BUDGET, |c| {
            let mut c = c.to_vec();
            (1..=5).any(|x| {
                c[0] = x;
                is_proper(&g, &c, 5)
            })
        });
        assert_eq!(out, ReachOutcome::NoneReachable);
    }

    #[test]
    fn generator_is_deterministic_and_bounded() {
        for seed in 0..50 {
            let g = gen(2, seed);
            assert!(g.edge_count() <= 3);
            assert_eq!(gen(7, seed), gen(7, seed));
        }
        assert!(corpus(30).len() >= 200);
    }

    #[test]
    fn tight_families_are_regular() {
        let g = pendant_core(5, 3);
        assert_eq!(g.vertex_count(), 15);
        assert_eq!(max_degree(&g), 14);
        for seed in 0..20 {
            let g = tight(seed);
            let d = degrees(&g);
            assert!(d.iter().all(|&x| x == d[0]));
            assert_eq!(g, tight(seed));
        }
    }
}
