//! Loopless multigraphs with dense vertex and edge identifiers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;
pub type EdgeId = usize;

/// Largest vertex count accepted by the exhaustive density computation.
pub const GAMMA_EXACT_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {edge} has endpoint {vertex} but the graph has {vertex_count} vertices")]
    VertexOutOfRange {
        edge: EdgeId,
        vertex: Vertex,
        vertex_count: usize,
    },
    #[error("edge {edge} is a loop at vertex {vertex}")]
    Loop { edge: EdgeId, vertex: Vertex },
    #[error("density is only defined for odd sets of at least 3 vertices, got {size}")]
    NotOddSet { size: usize },
    #[error("vertex {vertex} is outside the graph or repeated in the set")]
    BadMember { vertex: Vertex },
    #[error("exact density needs at most {cap} vertices, graph has {vertex_count}")]
    TooLarge { vertex_count: usize, cap: usize },
    #[error("witness claims {claimed} induced edges but the set induces {actual}")]
    WitnessEdgeCount { claimed: usize, actual: usize },
    #[error("witness set needs more than {refuted} colors only if its ceiling exceeds it, ceiling is {ceiling}")]
    WitnessTooSparse { refuted: usize, ceiling: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    vertex_count: usize,
    ends: Vec<(Vertex, Vertex)>,
    incidence: Vec<Vec<EdgeId>>,
}

impl Multigraph {
    pub fn new(vertex_count: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        let mut incidence = vec![Vec::new(); vertex_count];
        for (id, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        edge: id,
                        vertex: w,
                        vertex_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::Loop { edge: id, vertex: u });
            }
            incidence[u].push(id);
            incidence[v].push(id);
        }
        Ok(Self {
            vertex_count,
            ends: edges.to_vec(),
            incidence,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    pub fn ends(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.ends[e]
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.ends
    }

    /// The endpoint of `e` that is not `v`.
    pub fn other(&self, e: EdgeId, v: Vertex) -> Vertex {
        let (a, b) = self.ends[e];
        if a == v {
            b
        } else {
            debug_assert_eq!(b, v, "vertex {v} is not an end of edge {e}");
            a
        }
    }

    /// Incident edges of `v` in increasing id order.
    pub fn incident(&self, v: Vertex) -> &[EdgeId] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.incidence[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of edges with both ends in `set`.
    pub fn induced_edge_count(&self, set: &VertexSet) -> usize {
        self.ends
            .iter()
            .filter(|&&(u, v)| set.contains(u) && set.contains(v))
            .count()
    }

    /// Edges with exactly one end in `set`, in id order.
    pub fn boundary(&self, set: &VertexSet) -> Vec<EdgeId> {
        self.ends
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| set.contains(u) != set.contains(v))
            .map(|(e, _)| e)
            .collect()
    }

    /// `ceil(2 |E(W)| / (|W| - 1))` for an odd set of at least three vertices.
    pub fn density_ceiling(&self, set: &VertexSet) -> Result<usize, GraphError> {
        let size = set.len();
        if size < 3 || size % 2 == 0 {
            return Err(GraphError::NotOddSet { size });
        }
        let induced = self.induced_edge_count(set);
        Ok((2 * induced).div_ceil(size - 1))
    }

    /// Maximum density ceiling over all odd sets, by enumeration.
    ///
    /// Returns `(0, None)` when the graph has fewer than three vertices.
    pub fn gamma_exact(&self) -> Result<(usize, Option<VertexSet>), GraphError> {
        let n = self.vertex_count;
        if n > GAMMA_EXACT_CAP {
            return Err(GraphError::TooLarge {
                vertex_count: n,
                cap: GAMMA_EXACT_CAP,
            });
        }
        let mut best: (usize, Option<VertexSet>) = (0, None);
        for mask in 0u32..(1u32 << n) {
            let size = mask.count_ones() as usize;
            if size < 3 || size % 2 == 0 {
                continue;
            }
            let set = VertexSet::from_iter(n, (0..n).filter(|&v| mask & (1 << v) != 0));
            let value = self.density_ceiling(&set)?;
            if best.1.is_none() || value > best.0 {
                best = (value, Some(set));
            }
        }
        Ok(best)
    }
}

/// A subset of the vertices of a fixed-size graph.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    member: Vec<bool>,
    len: usize,
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        Self {
            member: vec![false; universe],
            len: 0,
        }
    }

    pub fn from_iter(universe: usize, vertices: impl IntoIterator<Item = Vertex>) -> Self {
        let mut set = Self::new(universe);
        for v in vertices {
            set.insert(v);
        }
        set
    }

    pub fn full(universe: usize) -> Self {
        Self {
            member: vec![true; universe],
            len: universe,
        }
    }

    pub fn universe(&self) -> usize {
        self.member.len()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    /// Returns true if `v` was not already present.
    pub fn insert(&mut self, v: Vertex) -> bool {
        if self.member[v] {
            return false;
        }
        self.member[v] = true;
        self.len += 1;
        true
    }

    pub fn remove(&mut self, v: Vertex) -> bool {
        if !self.member[v] {
            return false;
        }
        self.member[v] = false;
        self.len -= 1;
        true
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(v, _)| v)
    }

    pub fn to_vec(&self) -> Vec<Vertex> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An odd vertex set whose density ceiling exceeds a palette size.
///
/// Construction checks the claim, so holding one is a proof that the
/// graph has no proper edge coloring with `refuted` colors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityWitness {
    pub vertices: Vec<Vertex>,
    pub induced_edges: usize,
    pub refuted: usize,
}

impl DensityWitness {
    pub fn certify(
        graph: &Multigraph,
        vertices: impl IntoIterator<Item = Vertex>,
        refuted: usize,
    ) -> Result<Self, GraphError> {
        let mut vertices: Vec<Vertex> = vertices.into_iter().collect();
        vertices.sort_unstable();
        let set = Self::member_set(graph, &vertices)?;
        let induced_edges = graph.induced_edge_count(&set);
        let witness = Self {
            vertices,
            induced_edges,
            refuted,
        };
        witness.verify(graph)?;
        Ok(witness)
    }

    pub fn verify(&self, graph: &Multigraph) -> Result<(), GraphError> {
        let set = Self::member_set(graph, &self.vertices)?;
        let actual = graph.induced_edge_count(&set);
        if actual != self.induced_edges {
            return Err(GraphError::WitnessEdgeCount {
                claimed: self.induced_edges,
                actual,
            });
        }
        let ceiling = graph.density_ceiling(&set)?;
        if ceiling <= self.refuted {
            return Err(GraphError::WitnessTooSparse {
                refuted: self.refuted,
                ceiling,
            });
        }
        Ok(())
    }

    pub fn ceiling(&self) -> usize {
        (2 * self.induced_edges).div_ceil(self.vertices.len() - 1)
    }

    fn member_set(graph: &Multigraph, vertices: &[Vertex]) -> Result<VertexSet, GraphError> {
        let mut set = VertexSet::new(graph.vertex_count());
        for &v in vertices {
            if v >= graph.vertex_count() || !set.insert(v) {
                return Err(GraphError::BadMember { vertex: v });
            }
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(mult: usize) -> Multigraph {
        let mut edges = Vec::new();
        for _ in 0..mult {
            edges.extend([(0, 1), (1, 2), (2, 0)]);
        }
        Multigraph::new(3, &edges).unwrap()
    }

    #[test]
    fn rejects_loops_and_range_errors() {
        assert_eq!(
            Multigraph::new(2, &[(1, 1)]),
            Err(GraphError::Loop { edge: 0, vertex: 1 })
        );
        assert!(matches!(
            Multigraph::new(2, &[(0, 2)]),
            Err(GraphError::VertexOutOfRange { vertex: 2, .. })
        ));
    }

    #[test]
    fn boundary_and_induced_counts() {
        let g = Multigraph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 1)]).unwrap();
        let set = VertexSet::from_iter(4, [0, 1]);
        assert_eq!(g.induced_edge_count(&set), 2);
        assert_eq!(g.boundary(&set), vec![1]);
        assert_eq!(g.max_degree(), 3);
    }

    #[test]
    fn density_needs_odd_sets() {
        let g = triangle(1);
        assert_eq!(
            g.density_ceiling(&VertexSet::from_iter(3, [0, 1])),
            Err(GraphError::NotOddSet { size: 2 })
        );
        assert_eq!(g.density_ceiling(&VertexSet::full(3)), Ok(3));
    }

    #[test]
    fn gamma_of_fat_triangle() {
        for mult in 1..=4 {
            let (gamma, set) = triangle(mult).gamma_exact().unwrap();
            assert_eq!(gamma, 3 * mult);
            assert_eq!(set.unwrap().len(), 3);
        }
        let (gamma, set) = Multigraph::new(2, &[(0, 1)]).unwrap().gamma_exact().unwrap();
        assert_eq!((gamma, set), (0, None));
    }

    #[test]
    fn witness_validation() {
        let g = triangle(2);
        let w = DensityWitness::certify(&g, [2, 0, 1], 5).unwrap();
        assert_eq!(w.vertices, vec![0, 1, 2]);
        assert_eq!(w.ceiling(), 6);
        assert!(DensityWitness::certify(&g, [0, 1, 2], 6).is_err());
        let forged = DensityWitness {
            vertices: vec![0, 1, 2],
            induced_edges: 7,
            refuted: 5,
        };
        assert!(forged.verify(&g).is_err());
    }
}
