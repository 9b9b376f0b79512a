//! Partial edge colorings and Kempe exchanges.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, Multigraph, Vertex, VertexSet};

/// Colors are `1..=k`; `0` is reserved for "uncolored" in flat assignments.
pub type Color = usize;

/// A set of colors backed by a bit vector.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct ColorSet {
    words: Vec<u64>,
}

impl ColorSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, c: Color) -> bool {
        let (w, b) = (c / 64, c % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn remove(&mut self, c: Color) -> bool {
        let (w, b) = (c / 64, c % 64);
        match self.words.get_mut(w) {
            Some(word) if *word & (1 << b) != 0 => {
                *word &= !(1 << b);
                true
            }
            _ => false,
        }
    }

    pub fn contains(&self, c: Color) -> bool {
        self.words
            .get(c / 64)
            .is_some_and(|word| word & (1 << (c % 64)) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Color> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            (0..64)
                .filter(move |b| word & (1 << b) != 0)
                .map(move |b| i * 64 + b)
        })
    }

    pub fn min(&self) -> Option<Color> {
        self.iter().next()
    }

    pub fn union_with(&mut self, other: &ColorSet) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersection(&self, other: &ColorSet) -> ColorSet {
        ColorSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn difference(&self, other: &ColorSet) -> ColorSet {
        ColorSet {
            words: self
                .words
                .iter()
                .enumerate()
                .map(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0))
                .collect(),
        }
    }

    pub fn is_disjoint(&self, other: &ColorSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }
}

impl FromIterator<Color> for ColorSet {
    fn from_iter<I: IntoIterator<Item = Color>>(iter: I) -> Self {
        let mut set = ColorSet::new();
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl std::fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// One recorded change to a coloring. Replaying a log from the coloring it
/// started on reproduces the final coloring exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Exchange {
    /// Swap the two colors on the component through `vertex`.
    Component {
        alpha: Color,
        beta: Color,
        vertex: Vertex,
    },
    /// Swap the two colors on every edge with no end in `inside`.
    Outside {
        alpha: Color,
        beta: Color,
        inside: Vec<Vertex>,
    },
    Assign {
        edge: EdgeId,
        color: Color,
    },
    Palette {
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainKind {
    Path,
    Cycle,
}

/// A connected component of the subgraph spanned by two color classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KempeComponent {
    pub alpha: Color,
    pub beta: Color,
    pub start: Vertex,
    pub kind: ChainKind,
    /// Vertices in path or cycle order.
    pub vertices: Vec<Vertex>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1]` (cyclically).
    pub edges: Vec<EdgeId>,
}

impl KempeComponent {
    pub fn ends(&self) -> Option<(Vertex, Vertex)> {
        match self.kind {
            ChainKind::Path => Some((self.vertices[0], *self.vertices.last().unwrap())),
            ChainKind::Cycle => None,
        }
    }

    pub fn has_end(&self, v: Vertex) -> bool {
        self.ends().is_some_and(|(a, b)| a == v || b == v)
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    /// The path re-oriented so that it starts at `v`. `None` if `v` is not an end.
    pub fn from_end(&self, v: Vertex) -> Option<(Vec<Vertex>, Vec<EdgeId>)> {
        let (a, b) = self.ends()?;
        if a == v {
            Some((self.vertices.clone(), self.edges.clone()))
        } else if b == v {
            let mut vs = self.vertices.clone();
            let mut es = self.edges.clone();
            vs.reverse();
            es.reverse();
            Some((vs, es))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("edge {edge} is already colored")]
    AlreadyColored { edge: EdgeId },
    #[error("color {color} is outside the palette 1..={k}")]
    OutOfPalette { color: Color, k: usize },
    #[error("color {color} is present at vertex {vertex}, cannot put it on edge {edge}")]
    NotMissing {
        edge: EdgeId,
        vertex: Vertex,
        color: Color,
    },
    #[error("the ({alpha},{beta}) component through {vertex} changed since it was extracted")]
    StaleComponent {
        alpha: Color,
        beta: Color,
        vertex: Vertex,
    },
    #[error("boundary edge {edge} carries color {color}, outside swap would break properness")]
    BoundaryColor { edge: EdgeId, color: Color },
    #[error("cannot shrink the palette from {from} to {to}")]
    PaletteShrink { from: usize, to: usize },
    #[error("a Kempe exchange needs two distinct palette colors, got {alpha} and {beta}")]
    BadPair { alpha: Color, beta: Color },
    #[error("vertex {vertex} is outside the graph")]
    BadVertex { vertex: Vertex },
}

/// The first invariant a coloring breaks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("coloring has {actual} entries for a graph with {expected} edges")]
    Length { expected: usize, actual: usize },
    #[error("edge {edge} has color {color} outside the palette 1..={k}")]
    OutOfPalette { edge: EdgeId, color: Color, k: usize },
    #[error("edges {first} and {second} share color {color} at vertex {vertex}")]
    Clash {
        vertex: Vertex,
        color: Color,
        first: EdgeId,
        second: EdgeId,
    },
    #[error("presence table disagrees with edge colors at vertex {vertex}, color {color}")]
    Bookkeeping { vertex: Vertex, color: Color },
}

#[derive(Debug, Clone)]
pub struct PartialColoring {
    k: usize,
    color: Vec<Color>,
    /// `at[v * (k + 1) + c]` is the edge at `v` colored `c`.
    at: Vec<Option<EdgeId>>,
    vertex_count: usize,
    log: Vec<Exchange>,
}

impl PartialEq for PartialColoring {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.color == other.color
    }
}

impl Eq for PartialColoring {}

impl PartialColoring {
    pub fn new(graph: &Multigraph, k: usize) -> Self {
        Self {
            k,
            color: vec![0; graph.edge_count()],
            at: vec![None; graph.vertex_count() * (k + 1)],
            vertex_count: graph.vertex_count(),
            log: Vec::new(),
        }
    }

    /// Build from a flat assignment (`0` = uncolored), checking properness.
    pub fn from_assignment(
        graph: &Multigraph,
        k: usize,
        colors: &[Color],
    ) -> Result<Self, Violation> {
        if colors.len() != graph.edge_count() {
            return Err(Violation::Length {
                expected: graph.edge_count(),
                actual: colors.len(),
            });
        }
        let mut phi = Self::new(graph, k);
        for (e, &c) in colors.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if c > k {
                return Err(Violation::OutOfPalette { edge: e, color: c, k });
            }
            let (u, v) = graph.ends(e);
            for w in [u, v] {
                if let Some(prev) = phi.edge_at(w, c) {
                    return Err(Violation::Clash {
                        vertex: w,
                        color: c,
                        first: prev,
                        second: e,
                    });
                }
            }
            phi.put(graph, e, c);
        }
        Ok(phi)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn color(&self, e: EdgeId) -> Option<Color> {
        match self.color[e] {
            0 => None,
            c => Some(c),
        }
    }

    pub fn assignment(&self) -> &[Color] {
        &self.color
    }

    pub fn edge_at(&self, v: Vertex, c: Color) -> Option<EdgeId> {
        if c == 0 || c > self.k {
            return None;
        }
        self.at[v * (self.k + 1) + c]
    }

    pub fn is_missing(&self, v: Vertex, c: Color) -> bool {
        c >= 1 && c <= self.k && self.edge_at(v, c).is_none()
    }

    pub fn missing(&self, v: Vertex) -> ColorSet {
        (1..=self.k).filter(|&c| self.is_missing(v, c)).collect()
    }

    pub fn missing_union(&self, vertices: impl IntoIterator<Item = Vertex>) -> ColorSet {
        let mut out = ColorSet::new();
        for v in vertices {
            out.union_with(&self.missing(v));
        }
        out
    }

    pub fn common_missing(&self, u: Vertex, v: Vertex) -> Option<Color> {
        (1..=self.k).find(|&c| self.is_missing(u, c) && self.is_missing(v, c))
    }

    pub fn colored_count(&self) -> usize {
        self.color.iter().filter(|&&c| c != 0).count()
    }

    pub fn is_complete(&self) -> bool {
        self.color.iter().all(|&c| c != 0)
    }

    pub fn colors_used(&self) -> usize {
        self.color
            .iter()
            .filter(|&&c| c != 0)
            .copied()
            .collect::<ColorSet>()
            .len()
    }

    pub fn log(&self) -> &[Exchange] {
        &self.log
    }

    pub fn take_log(&mut self) -> Vec<Exchange> {
        std::mem::take(&mut self.log)
    }

    /// A copy that starts with an empty exchange log.
    pub fn detached(&self) -> Self {
        Self {
            k: self.k,
            color: self.color.clone(),
            at: self.at.clone(),
            vertex_count: self.vertex_count,
            log: Vec::new(),
        }
    }

    fn slot(&self, v: Vertex, c: Color) -> usize {
        v * (self.k + 1) + c
    }

    fn put(&mut self, graph: &Multigraph, e: EdgeId, c: Color) {
        let (u, v) = graph.ends(e);
        self.color[e] = c;
        let (su, sv) = (self.slot(u, c), self.slot(v, c));
        self.at[su] = Some(e);
        self.at[sv] = Some(e);
    }

    fn clear(&mut self, graph: &Multigraph, e: EdgeId) {
        let c = self.color[e];
        if c == 0 {
            return;
        }
        let (u, v) = graph.ends(e);
        let (su, sv) = (self.slot(u, c), self.slot(v, c));
        self.at[su] = None;
        self.at[sv] = None;
        self.color[e] = 0;
    }

    pub fn assign(&mut self, graph: &Multigraph, e: EdgeId, c: Color) -> Result<(), ColoringError> {
        if self.color[e] != 0 {
            return Err(ColoringError::AlreadyColored { edge: e });
        }
        if c == 0 || c > self.k {
            return Err(ColoringError::OutOfPalette { color: c, k: self.k });
        }
        let (u, v) = graph.ends(e);
        for w in [u, v] {
            if !self.is_missing(w, c) {
                return Err(ColoringError::NotMissing {
                    edge: e,
                    vertex: w,
                    color: c,
                });
            }
        }
        self.put(graph, e, c);
        self.log.push(Exchange::Assign { edge: e, color: c });
        Ok(())
    }

    pub fn set_palette(&mut self, k: usize) -> Result<(), ColoringError> {
        if k < self.k {
            return Err(ColoringError::PaletteShrink { from: self.k, to: k });
        }
        if k == self.k {
            return Ok(());
        }
        let mut at = vec![None; self.vertex_count * (k + 1)];
        for v in 0..self.vertex_count {
            for c in 1..=self.k {
                at[v * (k + 1) + c] = self.at[v * (self.k + 1) + c];
            }
        }
        self.at = at;
        self.k = k;
        self.log.push(Exchange::Palette { k });
        Ok(())
    }

    fn check_pair(&self, alpha: Color, beta: Color) -> Result<(), ColoringError> {
        if alpha == beta || alpha == 0 || beta == 0 || alpha > self.k || beta > self.k {
            return Err(ColoringError::BadPair { alpha, beta });
        }
        Ok(())
    }

    fn walk(
        &self,
        graph: &Multigraph,
        start: Vertex,
        first: Color,
        second: Color,
    ) -> (Vec<Vertex>, Vec<EdgeId>, bool) {
        let (mut vs, mut es) = (Vec::new(), Vec::new());
        let (mut cur, mut col) = (start, first);
        while let Some(e) = self.edge_at(cur, col) {
            let next = graph.other(e, cur);
            es.push(e);
            if next == start {
                return (vs, es, true);
            }
            vs.push(next);
            cur = next;
            col = if col == first { second } else { first };
        }
        (vs, es, false)
    }

    /// The `(alpha, beta)` component containing `v`.
    pub fn component(
        &self,
        graph: &Multigraph,
        v: Vertex,
        alpha: Color,
        beta: Color,
    ) -> Result<KempeComponent, ColoringError> {
        self.check_pair(alpha, beta)?;
        if v >= self.vertex_count {
            return Err(ColoringError::BadVertex { vertex: v });
        }
        let (fwd_v, fwd_e, closed) = self.walk(graph, v, alpha, beta);
        if closed {
            let mut vertices = vec![v];
            vertices.extend(fwd_v);
            return Ok(KempeComponent {
                alpha,
                beta,
                start: v,
                kind: ChainKind::Cycle,
                vertices,
                edges: fwd_e,
            });
        }
        let (back_v, back_e, _) = self.walk(graph, v, beta, alpha);
        let mut vertices: Vec<Vertex> = back_v.into_iter().rev().collect();
        vertices.push(v);
        vertices.extend(fwd_v);
        let mut edges: Vec<EdgeId> = back_e.into_iter().rev().collect();
        edges.extend(fwd_e);
        Ok(KempeComponent {
            alpha,
            beta,
            start: v,
            kind: ChainKind::Path,
            vertices,
            edges,
        })
    }

    fn flip(&mut self, graph: &Multigraph, edges: &[EdgeId], alpha: Color, beta: Color) {
        let old: Vec<Color> = edges.iter().map(|&e| self.color[e]).collect();
        for &e in edges {
            self.clear(graph, e);
        }
        for (&e, &c) in edges.iter().zip(&old) {
            let swapped = if c == alpha { beta } else { alpha };
            self.put(graph, e, swapped);
        }
        if cfg!(debug_assertions) {
            for &e in edges {
                let (u, v) = graph.ends(e);
                debug_assert!(self.vertex_consistent(graph, u));
                debug_assert!(self.vertex_consistent(graph, v));
            }
        }
    }

    /// Swap the colors of a component extracted earlier from this coloring.
    pub fn swap(&mut self, graph: &Multigraph, comp: &KempeComponent) -> Result<(), ColoringError> {
        let fresh = self.component(graph, comp.start, comp.alpha, comp.beta)?;
        if fresh.edges != comp.edges {
            return Err(ColoringError::StaleComponent {
                alpha: comp.alpha,
                beta: comp.beta,
                vertex: comp.start,
            });
        }
        self.flip(graph, &comp.edges, comp.alpha, comp.beta);
        self.log.push(Exchange::Component {
            alpha: comp.alpha,
            beta: comp.beta,
            vertex: comp.start,
        });
        Ok(())
    }

    /// Extract and swap the `(alpha, beta)` component through `v`.
    pub fn swap_at(
        &mut self,
        graph: &Multigraph,
        v: Vertex,
        alpha: Color,
        beta: Color,
    ) -> Result<KempeComponent, ColoringError> {
        let comp = self.component(graph, v, alpha, beta)?;
        self.swap(graph, &comp)?;
        Ok(comp)
    }

    /// Swap `alpha` and `beta` on every edge with both ends outside `inside`.
    ///
    /// Refuses when a boundary edge of `inside` carries either color, since
    /// then the result would not be a union of whole components.
    pub fn swap_outside(
        &mut self,
        graph: &Multigraph,
        inside: &VertexSet,
        alpha: Color,
        beta: Color,
    ) -> Result<(), ColoringError> {
        self.check_pair(alpha, beta)?;
        let mut targets = Vec::new();
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            let c = self.color[e];
            if c != alpha && c != beta {
                continue;
            }
            match (inside.contains(u), inside.contains(v)) {
                (false, false) => targets.push(e),
                (true, true) => {}
                _ => return Err(ColoringError::BoundaryColor { edge: e, color: c }),
            }
        }
        self.flip(graph, &targets, alpha, beta);
        self.log.push(Exchange::Outside {
            alpha,
            beta,
            inside: inside.to_vec(),
        });
        Ok(())
    }

    pub fn apply(&mut self, graph: &Multigraph, op: &Exchange) -> Result<(), ColoringError> {
        match op {
            Exchange::Component { alpha, beta, vertex } => {
                self.swap_at(graph, *vertex, *alpha, *beta).map(|_| ())
            }
            Exchange::Outside { alpha, beta, inside } => {
                for &v in inside {
                    if v >= self.vertex_count {
                        return Err(ColoringError::BadVertex { vertex: v });
                    }
                }
                let set = VertexSet::from_iter(self.vertex_count, inside.iter().copied());
                self.swap_outside(graph, &set, *alpha, *beta)
            }
            Exchange::Assign { edge, color } => self.assign(graph, *edge, *color),
            Exchange::Palette { k } => self.set_palette(*k),
        }
    }

    fn vertex_consistent(&self, graph: &Multigraph, v: Vertex) -> bool {
        let mut seen = vec![None; self.k + 1];
        for &e in graph.incident(v) {
            let c = self.color[e];
            if c != 0 {
                if seen[c].is_some() {
                    return false;
                }
                seen[c] = Some(e);
            }
        }
        (1..=self.k).all(|c| seen[c] == self.edge_at(v, c))
    }

    /// Recompute every invariant from the edge colors alone.
    pub fn validate(&self, graph: &Multigraph) -> Result<(), Violation> {
        if self.color.len() != graph.edge_count() {
            return Err(Violation::Length {
                expected: graph.edge_count(),
                actual: self.color.len(),
            });
        }
        let mut seen: Vec<Vec<Option<EdgeId>>> = vec![vec![None; self.k + 1]; graph.vertex_count()];
        for (e, &c) in self.color.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if c > self.k {
                return Err(Violation::OutOfPalette { edge: e, color: c, k: self.k });
            }
            let (u, v) = graph.ends(e);
            for w in [u, v] {
                if let Some(first) = seen[w][c] {
                    return Err(Violation::Clash {
                        vertex: w,
                        color: c,
                        first,
                        second: e,
                    });
                }
                seen[w][c] = Some(e);
            }
        }
        for (v, row) in seen.iter().enumerate() {
            for c in 1..=self.k {
                if row[c] != self.edge_at(v, c) {
                    return Err(Violation::Bookkeeping { vertex: v, color: c });
                }
            }
        }
        Ok(())
    }
}

/// Replay `log` on a copy of `initial`.
pub fn replay(
    graph: &Multigraph,
    initial: &PartialColoring,
    log: &[Exchange],
) -> Result<PartialColoring, ColoringError> {
    let mut phi = initial.detached();
    for op in log {
        phi.apply(graph, op)?;
    }
    Ok(phi)
}

/// Color edges in id order with the smallest color missing at both ends.
/// Edges that cannot be colored are returned in id order. The returned
/// coloring has an empty log.
pub fn greedy_partial_color(graph: &Multigraph, k: usize) -> (PartialColoring, VecDeque<EdgeId>) {
    let mut phi = PartialColoring::new(graph, k);
    let mut queue = VecDeque::new();
    for e in 0..graph.edge_count() {
        let (u, v) = graph.ends(e);
        match phi.common_missing(u, v) {
            Some(c) => phi.put(graph, e, c),
            None => queue.push_back(e),
        }
    }
    (phi, queue)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> Multigraph {
        Multigraph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap()
    }

    #[test]
    fn color_set_ops() {
        let a: ColorSet = [1, 3, 70].into_iter().collect();
        let b: ColorSet = [3, 4].into_iter().collect();
        assert_eq!(a.len(), 3);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![3]);
        assert_eq!(a.difference(&b).iter().collect::<Vec<_>>(), vec![1, 70]);
        assert!(!a.is_disjoint(&b));
        assert_eq!(a.min(), Some(1));
    }

    #[test]
    fn greedy_on_triangle_leaves_one_edge() {
        let g = Multigraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let (phi, queue) = greedy_partial_color(&g, 2);
        assert_eq!(phi.assignment(), &[1, 2, 0]);
        assert_eq!(queue, VecDeque::from(vec![2]));
        assert!(phi.log().is_empty());
        phi.validate(&g).unwrap();
    }

    #[test]
    fn component_shapes() {
        let g = path4();
        let phi = PartialColoring::from_assignment(&g, 3, &[1, 2, 1, 2]).unwrap();
        let comp = phi.component(&g, 2, 1, 2).unwrap();
        assert_eq!(comp.kind, ChainKind::Path);
        assert_eq!(comp.vertices, vec![0, 1, 2, 3, 4]);
        assert_eq!(comp.edges, vec![0, 1, 2, 3]);
        let lonely = phi.component(&g, 0, 2, 3).unwrap();
        assert_eq!(lonely.vertices, vec![0]);
        assert!(lonely.edges.is_empty());

        let c4 = Multigraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let psi = PartialColoring::from_assignment(&c4, 2, &[1, 2, 1, 2]).unwrap();
        let cyc = psi.component(&c4, 1, 1, 2).unwrap();
        assert_eq!(cyc.kind, ChainKind::Cycle);
        assert_eq!(cyc.edges.len(), 4);
    }

    #[test]
    fn digon_is_a_cycle() {
        let g = Multigraph::new(2, &[(0, 1), (0, 1)]).unwrap();
        let phi = PartialColoring::from_assignment(&g, 2, &[1, 2]).unwrap();
        let comp = phi.component(&g, 0, 1, 2).unwrap();
        assert_eq!(comp.kind, ChainKind::Cycle);
        assert_eq!(comp.vertices, vec![0, 1]);
    }

    #[test]
    fn swap_and_stale_detection() {
        let g = path4();
        let mut phi = PartialColoring::from_assignment(&g, 3, &[1, 2, 0, 0]).unwrap();
        let comp = phi.component(&g, 0, 1, 2).unwrap();
        phi.assign(&g, 2, 1).unwrap();
        assert!(matches!(
            phi.swap(&g, &comp),
            Err(ColoringError::StaleComponent { .. })
        ));
        let comp = phi.component(&g, 0, 1, 2).unwrap();
        phi.swap(&g, &comp).unwrap();
        assert_eq!(phi.assignment(), &[2, 1, 2, 0]);
        phi.validate(&g).unwrap();
    }

    #[test]
    fn outside_swap_guards_boundary() {
        let g = path4();
        let mut phi = PartialColoring::from_assignment(&g, 3, &[1, 2, 3, 1]).unwrap();
        let inside = VertexSet::from_iter(5, [0, 1]);
        assert_eq!(
            phi.swap_outside(&g, &inside, 2, 3),
            Err(ColoringError::BoundaryColor { edge: 1, color: 2 })
        );
        phi.swap_outside(&g, &inside, 1, 3).unwrap();
        assert_eq!(phi.assignment(), &[1, 2, 1, 3]);
        phi.validate(&g).unwrap();
    }

    #[test]
    fn assign_checks_missing() {
        let g = path4();
        let mut phi = PartialColoring::from_assignment(&g, 2, &[1, 0, 0, 0]).unwrap();
        assert_eq!(
            phi.assign(&g, 1, 1),
            Err(ColoringError::NotMissing {
                edge: 1,
                vertex: 1,
                color: 1
            })
        );
        assert_eq!(phi.assign(&g, 0, 2), Err(ColoringError::AlreadyColored { edge: 0 }));
        phi.assign(&g, 1, 2).unwrap();
    }

    #[test]
    fn palette_growth_keeps_edges() {
        let g = path4();
        let mut phi = PartialColoring::from_assignment(&g, 2, &[1, 2, 1, 2]).unwrap();
        phi.set_palette(4).unwrap();
        assert_eq!(phi.edge_at(2, 1), Some(2));
        assert!(phi.is_missing(2, 4));
        phi.validate(&g).unwrap();
        assert!(phi.set_palette(3).is_err());
    }

    #[test]
    fn validate_reports_clash() {
        let g = path4();
        let v = PartialColoring::from_assignment(&g, 2, &[1, 1, 0, 0]).unwrap_err();
        assert_eq!(
            v,
            Violation::Clash {
                vertex: 1,
                color: 1,
                first: 0,
                second: 1
            }
        );
    }

    #[test]
    fn replay_reproduces() {
        let g = path4();
        let (start, _) = greedy_partial_color(&g, 3);
        let mut phi = start.clone();
        phi.swap_at(&g, 0, 1, 2).unwrap();
        phi.set_palette(4).unwrap();
        phi.swap_outside(&g, &VertexSet::from_iter(5, [0]), 1, 4).unwrap();
        let again = replay(&g, &start, phi.log()).unwrap();
        assert_eq!(again, phi);
    }
}
