use thiserror::Error;

use crate::coloring::{Color, ColorSet, PartialColoring};
use crate::graph::{EdgeId, Multigraph, Vertex, VertexSet};

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("edge {edge} does not have exactly one end in the tree")]
    NotAttached { edge: EdgeId },
    #[error("a tree needs at least one edge")]
    Empty,
}

/// A tree together with the order in which its edges were added.
///
/// The first edge contributes both ends; every later edge contributes the
/// one end that was not yet present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedTree {
    edges: Vec<EdgeId>,
    attach: Vec<Vertex>,
    vertices: Vec<Vertex>,
    position: Vec<usize>,
}

impl OrderedTree {
    pub fn rooted(graph: &Multigraph, e: EdgeId) -> Self {
        let (u, v) = graph.ends(e);
        let mut position = vec![ABSENT; graph.vertex_count()];
        position[u] = 0;
        position[v] = 1;
        Self {
            edges: vec![e],
            attach: vec![u],
            vertices: vec![u, v],
            position,
        }
    }

    pub fn from_edges(graph: &Multigraph, edges: &[EdgeId]) -> Result<Self, TreeError> {
        let (&first, rest) = edges.split_first().ok_or(TreeError::Empty)?;
        let mut tree = Self::rooted(graph, first);
        for &e in rest {
            tree.push(graph, e)?;
        }
        Ok(tree)
    }

    /// Append `e`; returns the vertex it adds.
    pub fn push(&mut self, graph: &Multigraph, e: EdgeId) -> Result<Vertex, TreeError> {
        let (u, v) = graph.ends(e);
        let (old, fresh) = match (self.contains(u), self.contains(v)) {
            (true, false) => (u, v),
            (false, true) => (v, u),
            _ => return Err(TreeError::NotAttached { edge: e }),
        };
        self.position[fresh] = self.vertices.len();
        self.vertices.push(fresh);
        self.edges.push(e);
        self.attach.push(old);
        Ok(fresh)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn root(&self) -> EdgeId {
        self.edges[0]
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.position.get(v).is_some_and(|&p| p != ABSENT)
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    /// Discovery index of `v`: 0 and 1 for the root ends, then one per edge.
    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.position.get(v).copied().filter(|&p| p != ABSENT)
    }

    pub fn last_vertex(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    /// The vertex added by the `i`-th edge (0-based; the root adds two).
    pub fn added_by(&self, i: usize) -> Vertex {
        self.vertices[i + 1]
    }

    /// The end of the `i`-th edge that was present before it.
    pub fn attach_of(&self, i: usize) -> Vertex {
        self.attach[i]
    }

    /// Number of edges in the smallest prefix containing `v`.
    pub fn edges_to(&self, v: Vertex) -> Option<usize> {
        self.position(v).map(|p| p.max(1))
    }

    pub fn prefix(&self, len: usize) -> Self {
        assert!(len >= 1 && len <= self.len(), "prefix length {len} out of range");
        let mut position = self.position.clone();
        for &v in &self.vertices[len + 1..] {
            position[v] = ABSENT;
        }
        Self {
            edges: self.edges[..len].to_vec(),
            attach: self.attach[..len].to_vec(),
            vertices: self.vertices[..len + 1].to_vec(),
            position,
        }
    }

    /// The smallest prefix containing `v`.
    pub fn prefix_at(&self, v: Vertex) -> Option<Self> {
        self.edges_to(v).map(|len| self.prefix(len))
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::from_iter(self.position.len(), self.vertices.iter().copied())
    }

    /// Vertices added after the first `len` edges.
    pub fn vertices_after(&self, len: usize) -> &[Vertex] {
        &self.vertices[len + 1..]
    }

    /// Boundary edges ordered by the discovery index of their tree end, then id.
    pub fn boundary(&self, graph: &Multigraph) -> Vec<EdgeId> {
        let mut out = Vec::new();
        for &v in &self.vertices {
            for &e in graph.incident(v) {
                if !self.contains(graph.other(e, v)) {
                    out.push(e);
                }
            }
        }
        out
    }

    /// Tree end of a boundary edge.
    pub fn inner_end(&self, graph: &Multigraph, e: EdgeId) -> Option<Vertex> {
        let (u, v) = graph.ends(e);
        match (self.contains(u), self.contains(v)) {
            (true, false) => Some(u),
            (false, true) => Some(v),
            _ => None,
        }
    }
}

pub fn missing_union(phi: &PartialColoring, tree: &OrderedTree) -> ColorSet {
    phi.missing_union(tree.vertices().iter().copied())
}

/// Edge count of the smallest prefix whose missing sets overlap.
pub fn first_nonelementary(phi: &PartialColoring, tree: &OrderedTree) -> Option<usize> {
    let mut seen = ColorSet::new();
    for (p, &v) in tree.vertices().iter().enumerate() {
        let m = phi.missing(v);
        if !m.is_disjoint(&seen) {
            return Some(p.max(1));
        }
        seen.union_with(&m);
    }
    None
}

pub fn is_elementary(phi: &PartialColoring, tree: &OrderedTree) -> bool {
    first_nonelementary(phi, tree).is_none()
}

/// No boundary edge carries a color missing somewhere in the tree.
pub fn is_closed(graph: &Multigraph, phi: &PartialColoring, tree: &OrderedTree) -> bool {
    let m = missing_union(phi, tree);
    tree.boundary(graph)
        .into_iter()
        .all(|e| phi.color(e).is_none_or(|c| !m.contains(c)))
}

/// Boundary edges carrying `color`.
pub fn boundary_with(
    graph: &Multigraph,
    phi: &PartialColoring,
    tree: &OrderedTree,
    color: Color,
) -> Vec<EdgeId> {
    tree.boundary(graph)
        .into_iter()
        .filter(|&e| phi.color(e) == Some(color))
        .collect()
}

/// Grow `tree` by repeatedly adding the first boundary edge (in discovery
/// order) that `admissible` accepts. The predicate sees the current tree, its
/// missing-color union, the edge and its color.
pub fn extend_with(
    graph: &Multigraph,
    phi: &PartialColoring,
    mut tree: OrderedTree,
    mut admissible: impl FnMut(&OrderedTree, &ColorSet, EdgeId, Color) -> bool,
) -> OrderedTree {
    let mut missing = missing_union(phi, &tree);
    'grow: loop {
        for e in tree.boundary(graph) {
            let Some(c) = phi.color(e) else { continue };
            if admissible(&tree, &missing, e, c) {
                let v = tree.push(graph, e).expect("boundary edge attaches");
                missing.union_with(&phi.missing(v));
                continue 'grow;
            }
        }
        return tree;
    }
}

/// The deterministic closure: add boundary edges whose color is missing
/// in the tree until none is left.
pub fn closure(graph: &Multigraph, phi: &PartialColoring, tree: OrderedTree) -> OrderedTree {
    extend_with(graph, phi, tree, |_, m, _, c| m.contains(c))
}

/// Closure with the next edge picked by `choose` among all eligible ones.
pub fn closure_with_order(
    graph: &Multigraph,
    phi: &PartialColoring,
    mut tree: OrderedTree,
    mut choose: impl FnMut(&[EdgeId]) -> usize,
) -> OrderedTree {
    loop {
        let m = missing_union(phi, &tree);
        let eligible: Vec<EdgeId> = tree
            .boundary(graph)
            .into_iter()
            .filter(|&e| phi.color(e).is_some_and(|c| m.contains(c)))
            .collect();
        if eligible.is_empty() {
            return tree;
        }
        let pick = eligible[choose(&eligible) % eligible.len()];
        tree.push(graph, pick).expect("boundary edge attaches");
    }
}

/// A maximal two-colored walk leaving the tree through a boundary edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    /// Vertices starting at the tree end.
    pub vertices: Vec<Vertex>,
    pub edges: Vec<EdgeId>,
}

impl Chain {
    pub fn tree_end(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn far_end(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }
}

/// How the `alpha`/`delta` boundary edges of a tree split into exits
/// (chains ending outside) and tree paths (chains returning to the tree).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExitReport {
    pub alpha: Color,
    pub delta: Color,
    pub exits: Vec<Chain>,
    /// Each tree path once, oriented from its end discovered first.
    pub tree_paths: Vec<Chain>,
}

impl ExitReport {
    /// All edges on tree paths, sorted.
    pub fn nonexit_edges(&self) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.tree_paths.iter().flat_map(|p| p.edges.clone()).collect();
        out.sort_unstable();
        out
    }

    pub fn exit_edges(&self) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.exits.iter().map(|p| p.edges[0]).collect();
        out.sort_unstable();
        out
    }

    pub fn exit_vertices(&self) -> Vec<Vertex> {
        self.exits.iter().map(Chain::tree_end).collect()
    }
}

pub fn exit_partition(
    graph: &Multigraph,
    phi: &PartialColoring,
    tree: &OrderedTree,
    alpha: Color,
    delta: Color,
) -> ExitReport {
    let mut exits = Vec::new();
    let mut tree_paths: Vec<Chain> = Vec::new();
    for e in tree.boundary(graph) {
        let Some(c) = phi.color(e) else { continue };
        if c != alpha && c != delta {
            continue;
        }
        let start = tree.inner_end(graph, e).unwrap();
        let mut chain = Chain {
            vertices: vec![start],
            edges: vec![e],
        };
        let mut cur = graph.other(e, start);
        let mut next = if c == alpha { delta } else { alpha };
        chain.vertices.push(cur);
        let returned = loop {
            if tree.contains(cur) {
                break true;
            }
            match phi.edge_at(cur, next) {
                None => break false,
                Some(f) => {
                    cur = graph.other(f, cur);
                    chain.edges.push(f);
                    chain.vertices.push(cur);
                    next = if next == alpha { delta } else { alpha };
                }
            }
        };
        if !returned {
            exits.push(chain);
            continue;
        }
        let (a, b) = (chain.tree_end(), chain.far_end());
        let (pa, pb) = (tree.position(a).unwrap(), tree.position(b).unwrap());
        let keep = pa < pb || (pa == pb && chain.edges[0] < *chain.edges.last().unwrap());
        if keep {
            tree_paths.push(chain);
        }
    }
    ExitReport {
        alpha,
        delta,
        exits,
        tree_paths,
    }
}

/// The tree extended by the interior of every `alpha`/`delta` tree path,
/// each entered from its end discovered first.
pub fn plus_tree(
    graph: &Multigraph,
    phi: &PartialColoring,
    tree: &OrderedTree,
    alpha: Color,
    delta: Color,
) -> OrderedTree {
    let report = exit_partition(graph, phi, tree, alpha, delta);
    let mut paths = report.tree_paths;
    paths.sort_by_key(|p| (tree.position(p.tree_end()).unwrap(), p.edges[0]));
    let mut out = tree.clone();
    for p in paths {
        for &e in &p.edges[..p.edges.len() - 1] {
            if out.push(graph, e).is_err() {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_positions() {
        let g = Multigraph::new(5, &[(0, 1), (1, 2), (0, 3), (3, 4)]).unwrap();
        let t = OrderedTree::from_edges(&g, &[0, 1, 2, 3]).unwrap();
        assert_eq!(t.vertices(), &[0, 1, 2, 3, 4]);
        assert_eq!(t.attach_of(3), 3);
        assert_eq!(t.edges_to(0), Some(1));
        assert_eq!(t.edges_to(3), Some(3));
        let p = t.prefix(2);
        assert!(!p.contains(3) && p.contains(2));
        assert_eq!(p.last_vertex(), 2);
        assert!(OrderedTree::from_edges(&g, &[0, 3]).is_err());
    }

    #[test]
    fn closure_of_uncolored_triangle_edge() {
        // K3 with uv uncolored, vw = 1, wu = 2 and k = 2.
        let g = Multigraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let phi = PartialColoring::from_assignment(&g, 2, &[0, 1, 2]).unwrap();
        let t = closure(&g, &phi, OrderedTree::rooted(&g, 0));
        assert_eq!(t.vertices().len(), 3);
        assert!(is_closed(&g, &phi, &t));
        assert!(is_elementary(&phi, &t));
    }

    #[test]
    fn exits_and_tree_paths() {
        // Tree {0,1}; the (2,3) chain 0-4-5-6-1 returns to the tree.
        let g = Multigraph::new(7, &[(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (5, 6), (6, 1)]).unwrap();
        let phi = PartialColoring::from_assignment(&g, 3, &[0, 1, 2, 2, 3, 2, 3]).unwrap();
        let t = OrderedTree::rooted(&g, 0);
        let r = exit_partition(&g, &phi, &t, 1, 2);
        assert_eq!(r.exit_edges(), vec![1, 3]);
        assert_eq!(r.exit_vertices(), vec![0, 1]);
        assert!(r.tree_paths.is_empty());
        let r = exit_partition(&g, &phi, &t, 2, 3);
        assert_eq!(r.tree_paths.len(), 1);
        assert_eq!(r.tree_paths[0].vertices, vec![0, 4, 5, 6, 1]);
        let plus = plus_tree(&g, &phi, &t, 2, 3);
        assert_eq!(plus.vertices(), &[0, 1, 4, 5, 6]);
    }
}
