use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tree::{
    boundary_with, closure, exit_partition, extend_with, missing_union, plus_tree, OrderedTree,
};
use crate::coloring::{Color, ColorSet, PartialColoring};
use crate::graph::{DensityWitness, EdgeId, GraphError, Multigraph, Vertex};

/// Two reserved colors per connecting color that is not missing in the tree.
pub type Reservation = BTreeMap<Color, [Color; 2]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frontier {
    /// Tail is a prefix of the closure of the uncolored edge.
    Base,
    /// Tail extends the last complete stage by its tree paths and closure.
    Stage,
    /// Tail is a level grown from the last level edge.
    Level,
    /// Tail is a phase grown from the last phase edge.
    Phase,
}

/// Lexicographic progress measure: stage, level and phase counts, then
/// trunk and branch lengths.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Potential {
    pub stages: usize,
    pub levels: usize,
    pub phases: usize,
    pub trunk: usize,
    pub branch: usize,
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.stages, self.levels, self.phases, self.trunk, self.branch
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrowthError {
    #[error("connecting color {delta} appears on fewer than two boundary edges")]
    TooFewConnecting { delta: Color },
    #[error("no edge continues a tree path out of the current level")]
    NoLevelEdge,
    #[error("no reserved color leaves the current phase")]
    NoPhaseEdge,
    #[error("the new phase misses no color other than the connecting color")]
    NoFreshColor,
    #[error("not enough unreserved colors to reserve a pair for {delta}")]
    ReservationShortfall { delta: Color },
    #[error("operation {op} is not available at frontier {frontier:?}")]
    WrongFrontier { op: &'static str, frontier: Frontier },
    #[error("witness construction failed: {0}")]
    Witness(#[from] GraphError),
}

/// The edges beyond the last complete part that hang as a path from the
/// rest of the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrunkBranch {
    pub trunk_len: usize,
    /// `v_0, ..., v_t` with `v_0` in the trunk.
    pub branch: Vec<Vertex>,
    /// `f_1, ..., f_t`.
    pub branch_edges: Vec<EdgeId>,
    /// Last vertex of the trunk.
    pub last_trunk: Vertex,
}

impl TrunkBranch {
    pub fn len(&self) -> usize {
        self.branch_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branch_edges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connecting {
    Color(Color),
    Witness(DensityWitness),
}

/// A tree grown from an uncolored edge in stages, levels and phases.
///
/// Complete parts are recorded by their end (edge count of the prefix that
/// finishes them). The edges beyond the last recorded end form the tail,
/// whose kind is given by `frontier`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TashkinovState {
    pub edge: EdgeId,
    pub alpha0: Color,
    pub tree: OrderedTree,
    pub stage_ends: Vec<usize>,
    /// One connecting color per complete stage.
    pub connecting: Vec<Color>,
    /// Level extending edges; at the level and phase frontiers the last one
    /// starts the tail (level) or the first phase.
    pub level_edges: Vec<EdgeId>,
    pub level_ends: Vec<usize>,
    pub phase_edges: Vec<EdgeId>,
    pub phase_ends: Vec<usize>,
    /// Reservation in force for each phase, oldest first.
    pub reserved: Vec<Reservation>,
    pub frontier: Frontier,
}

impl TashkinovState {
    /// The closure of the uncolored edge `edge`, with the given base color.
    pub fn base(graph: &Multigraph, phi: &PartialColoring, edge: EdgeId, alpha0: Color) -> Self {
        let tree = closure(graph, phi, OrderedTree::rooted(graph, edge));
        Self::from_base_tree(edge, alpha0, tree)
    }

    pub fn from_base_tree(edge: EdgeId, alpha0: Color, tree: OrderedTree) -> Self {
        Self {
            edge,
            alpha0,
            tree,
            stage_ends: Vec::new(),
            connecting: Vec::new(),
            level_edges: Vec::new(),
            level_ends: Vec::new(),
            phase_edges: Vec::new(),
            phase_ends: Vec::new(),
            reserved: Vec::new(),
            frontier: Frontier::Base,
        }
    }

    /// Index of the last complete stage, if any.
    pub fn last_stage(&self) -> Option<usize> {
        self.stage_ends.len().checked_sub(1)
    }

    /// Edge count of the complete stage the levels and phases build on.
    pub fn stage_len(&self) -> usize {
        *self.stage_ends.last().expect("state has a complete stage")
    }

    pub fn connecting_color(&self) -> Color {
        *self.connecting.last().expect("state has a connecting color")
    }

    /// All connecting colors so far.
    pub fn connecting_set(&self) -> ColorSet {
        self.connecting.iter().copied().collect()
    }

    /// Edge count of the part the tail grows from (the root edge for the base).
    pub fn final_len(&self) -> usize {
        match self.frontier {
            Frontier::Base => 1,
            Frontier::Stage => self.stage_len(),
            Frontier::Level => self.level_ends.last().copied().unwrap_or(self.stage_len()),
            Frontier::Phase => self
                .phase_ends
                .last()
                .or(self.level_ends.last())
                .copied()
                .unwrap_or(self.stage_len()),
        }
    }

    /// Edge count where the levels begin (the last stage) at level and phase frontiers.
    pub fn level_base_len(&self) -> usize {
        self.stage_len()
    }

    /// Edge count of the tree the first phase grows from.
    pub fn phase_base_len(&self) -> usize {
        self.level_ends.last().copied().unwrap_or(self.stage_len())
    }

    /// Reservation that governs the tail at the phase frontier.
    pub fn current_reservation(&self) -> &Reservation {
        self.reserved.last().expect("phase frontier has a reservation")
    }

    pub fn phase_count(&self) -> usize {
        self.phase_ends.len()
    }

    /// The edge that starts the tail at the level or phase frontier.
    pub fn tail_edge(&self) -> Option<EdgeId> {
        match self.frontier {
            Frontier::Base | Frontier::Stage => None,
            Frontier::Level => self.level_edges.last().copied(),
            Frontier::Phase => self
                .phase_edges
                .last()
                .or(self.level_edges.last())
                .copied(),
        }
    }

    pub fn trunk_branch(&self) -> TrunkBranch {
        let t = &self.tree;
        let p = t.len();
        let floor = self.final_len();
        if p <= floor {
            return TrunkBranch {
                trunk_len: p,
                branch: vec![t.last_vertex()],
                branch_edges: Vec::new(),
                last_trunk: t.last_vertex(),
            };
        }
        let mut j = p - 1;
        while j > floor && t.attach_of(j) == t.added_by(j - 1) {
            j -= 1;
        }
        let mut branch = vec![t.attach_of(j)];
        branch.extend((j..p).map(|i| t.added_by(i)));
        TrunkBranch {
            trunk_len: j,
            branch,
            branch_edges: t.edges()[j..].to_vec(),
            last_trunk: t.added_by(j - 1),
        }
    }

    pub fn potential(&self) -> Potential {
        let tb = self.trunk_branch();
        let n = self.stage_ends.len();
        let (stages, levels, phases) = match self.frontier {
            Frontier::Base => (0, 0, 0),
            Frontier::Stage => (n, 0, 0),
            Frontier::Level => (n - 1, self.level_ends.len() + 1, 0),
            Frontier::Phase => (n - 1, self.level_ends.len(), self.phase_ends.len() + 1),
        };
        Potential {
            stages,
            levels,
            phases,
            trunk: tb.trunk_len,
            branch: tb.len(),
        }
    }

    /// Ends of every complete part, in order, paired with the frontier a
    /// prefix ending inside the following part would have.
    fn part_ends(&self) -> Vec<usize> {
        let mut ends = self.stage_ends.clone();
        ends.extend(&self.level_ends);
        ends.extend(&self.phase_ends);
        ends
    }

    /// The same construction cut after `len` edges.
    ///
    /// The cut lands in some part; everything after that part is dropped and
    /// the part becomes the tail.
    pub fn prefix(&self, len: usize) -> Self {
        assert!(len >= 1 && len <= self.tree.len());
        let mut out = self.clone();
        out.tree = self.tree.prefix(len);
        let ns = self.stage_ends.len();
        let stage_cut = self.stage_ends.iter().position(|&e| e >= len);
        if let Some(i) = stage_cut {
            out.stage_ends.truncate(i);
            out.connecting.truncate(i);
            out.level_edges.clear();
            out.level_ends.clear();
            out.phase_edges.clear();
            out.phase_ends.clear();
            out.reserved.clear();
            out.frontier = if i == 0 { Frontier::Base } else { Frontier::Stage };
            return out;
        }
        if self.frontier == Frontier::Stage || ns == 0 {
            return out;
        }
        if let Some(j) = self.level_ends.iter().position(|&e| e >= len) {
            out.level_ends.truncate(j);
            out.level_edges.truncate(j + 1);
            out.phase_edges.clear();
            out.phase_ends.clear();
            out.reserved.clear();
            out.frontier = Frontier::Level;
            return out;
        }
        if self.frontier == Frontier::Level {
            return out;
        }
        if let Some(h) = self.phase_ends.iter().position(|&e| e >= len) {
            out.phase_ends.truncate(h);
            out.phase_edges.truncate(h);
            out.reserved.truncate(h + 1);
        }
        out
    }

    /// Prefix ending with vertex `v`.
    pub fn prefix_at(&self, v: Vertex) -> Option<Self> {
        self.tree.edges_to(v).map(|len| self.prefix(len))
    }

    /// Keep the first `stages` complete stages and make `tree` the tail.
    pub fn with_stage_tail(&self, stages: usize, tree: OrderedTree) -> Self {
        let mut out = self.clone();
        out.tree = tree;
        out.stage_ends.truncate(stages);
        out.connecting.truncate(stages);
        out.level_edges.clear();
        out.level_ends.clear();
        out.phase_edges.clear();
        out.phase_ends.clear();
        out.reserved.clear();
        out.frontier = if stages == 0 { Frontier::Base } else { Frontier::Stage };
        out
    }

    /// Complete part ends strictly below the tail, in order.
    pub fn complete_ends(&self) -> Vec<usize> {
        self.part_ends()
    }

    /// Tail holds a complete part: closed under its growth rule.
    pub fn tail_is_complete(&self, graph: &Multigraph, phi: &PartialColoring) -> bool {
        let grown = match self.frontier {
            Frontier::Phase => self.extend_phase(graph, phi, self.tree.clone()),
            _ => closure(graph, phi, self.tree.clone()),
        };
        grown.len() == self.tree.len()
    }

    /// Choose a connecting color for the complete tail, or prove that the
    /// palette is too small.
    pub fn find_connecting_color(
        &self,
        graph: &Multigraph,
        phi: &PartialColoring,
    ) -> Result<Connecting, GrowthError> {
        let boundary = self.tree.boundary(graph);
        let mut count = vec![0usize; phi.k() + 1];
        for e in boundary {
            if let Some(c) = phi.color(e) {
                count[c] += 1;
            }
        }
        if let Some(delta) = (1..=phi.k()).find(|&c| count[c] >= 2) {
            return Ok(Connecting::Color(delta));
        }
        let w = DensityWitness::certify(graph, self.tree.vertices().iter().copied(), phi.k())?;
        Ok(Connecting::Witness(w))
    }

    /// Close the tail as a stage and grow the next one with `delta`.
    pub fn grow_stage(
        &mut self,
        graph: &Multigraph,
        phi: &PartialColoring,
        delta: Color,
    ) -> Result<(), GrowthError> {
        if !matches!(self.frontier, Frontier::Base | Frontier::Stage) {
            return Err(GrowthError::WrongFrontier {
                op: "grow_stage",
                frontier: self.frontier,
            });
        }
        if boundary_with(graph, phi, &self.tree, delta).len() < 2 {
            return Err(GrowthError::TooFewConnecting { delta });
        }
        self.stage_ends.push(self.tree.len());
        self.connecting.push(delta);
        self.frontier = Frontier::Stage;
        let plus = plus_tree(graph, phi, &self.tree, self.alpha0, delta);
        self.tree = closure(graph, phi, plus);
        Ok(())
    }

    /// First edge leaving `tree` along a tree path of the last stage.
    pub fn level_extending_edge(
        &self,
        graph: &Multigraph,
        phi: &PartialColoring,
        tree: &OrderedTree,
    ) -> Option<EdgeId> {
        let stage = self.tree.prefix(self.stage_len());
        let delta = self.connecting_color();
        let report = exit_partition(graph, phi, &stage, self.alpha0, delta);
        let mut best: Option<EdgeId> = None;
        for path in &report.tree_paths {
            let forward = path.vertices.iter().zip(&path.edges);
            let backward = path.vertices.iter().rev().zip(path.edges.iter().rev());
            for walk in [
                forward.map(|(&v, &e)| (v, e)).collect::<Vec<_>>(),
                backward.map(|(&v, &e)| (v, e)).collect::<Vec<_>>(),
            ] {
                for (v, e) in walk {
                    if !tree.contains(v) {
                        break;
                    }
                    if !tree.contains(graph.other(e, v)) {
                        if phi.color(e) == Some(delta) {
                            best = Some(best.map_or(e, |b| b.min(e)));
                        }
                        break;
                    }
                }
            }
        }
        best
    }

    /// Turn the complete stage tail into the base of levels: drop the tail
    /// and grow the first level.
    pub fn start_levels(
        &mut self,
        graph: &Multigraph,
        phi: &PartialColoring,
    ) -> Result<(), GrowthError> {
        if self.frontier != Frontier::Stage {
            return Err(GrowthError::WrongFrontier {
                op: "start_levels",
                frontier: self.frontier,
            });
        }
        self.tree = self.tree.prefix(self.stage_len());
        self.level_ends.clear();
        self.level_edges.clear();
        self.frontier = Frontier::Level;
        self.push_level(graph, phi)
    }

    /// Record the complete level tail and grow the next level.
    pub fn next_level(&mut self, graph: &Multigraph, phi: &PartialColoring) -> Result<(), GrowthError> {
        if self.frontier != Frontier::Level {
            return Err(GrowthError::WrongFrontier {
                op: "next_level",
                frontier: self.frontier,
            });
        }
        self.level_ends.push(self.tree.len());
        self.push_level(graph, phi)
    }

    fn push_level(&mut self, graph: &Multigraph, phi: &PartialColoring) -> Result<(), GrowthError> {
        let e = self
            .level_extending_edge(graph, phi, &self.tree)
            .ok_or(GrowthError::NoLevelEdge)?;
        self.level_edges.push(e);
        let mut tree = self.tree.clone();
        tree.push(graph, e).expect("level edge is a boundary edge");
        self.tree = closure(graph, phi, tree);
        Ok(())
    }

    /// Reserve two colors for each connecting color not missing in the tree.
    pub fn reserve_pairs(
        &self,
        phi: &PartialColoring,
        tree: &OrderedTree,
    ) -> Result<Reservation, GrowthError> {
        let missing = missing_union(phi, tree);
        let (u, v) = (tree.vertices()[0], tree.vertices()[1]);
        let at_edge = phi.missing_union([u, v]);
        let mut pool = missing.difference(&at_edge).iter().collect::<Vec<_>>().into_iter();
        let mut out = Reservation::new();
        for delta in self.connecting_set().iter() {
            if missing.contains(delta) {
                continue;
            }
            match (pool.next(), pool.next()) {
                (Some(a), Some(b)) => {
                    out.insert(delta, [a, b]);
                }
                _ => return Err(GrowthError::ReservationShortfall { delta }),
            }
        }
        Ok(out)
    }

    /// Turn the level tail into the first phase: drop it, reserve pairs and
    /// regrow from the same level edge under the phase rule.
    pub fn start_phases(
        &mut self,
        graph: &Multigraph,
        phi: &PartialColoring,
    ) -> Result<(), GrowthError> {
        if self.frontier != Frontier::Level {
            return Err(GrowthError::WrongFrontier {
                op: "start_phases",
                frontier: self.frontier,
            });
        }
        let base = self.tree.prefix(self.final_len());
        let reservation = self.reserve_pairs(phi, &base)?;
        self.reserved = vec![reservation];
        self.phase_edges.clear();
        self.phase_ends.clear();
        self.frontier = Frontier::Phase;
        let mut tree = base;
        let e = *self.level_edges.last().unwrap();
        tree.push(graph, e).expect("level edge is a boundary edge");
        self.tree = self.extend_phase(graph, phi, tree);
        Ok(())
    }

    /// Grow under the current reservation: a color missing in the tree may
    /// be followed unless it is reserved for a connecting color that is not
    /// yet missing.
    pub fn extend_phase(
        &self,
        graph: &Multigraph,
        phi: &PartialColoring,
        tree: OrderedTree,
    ) -> OrderedTree {
        let reservation = self.current_reservation();
        extend_with(graph, phi, tree, |_, m, _, c| {
            m.contains(c)
                && reservation
                    .iter()
                    .all(|(&delta, pair)| !pair.contains(&c) || m.contains(delta))
        })
    }

    /// Boundary edge that can start the next phase, with its connecting color.
    pub fn phase_extending_edge(
        &self,
        graph: &Multigraph,
        phi: &PartialColoring,
    ) -> Option<(EdgeId, Color)> {
        let reservation = self.current_reservation();
        let missing = missing_union(phi, &self.tree);
        for e in self.tree.boundary(graph) {
            let Some(c) = phi.color(e) else { continue };
            for (&delta, pair) in reservation {
                if pair.contains(&c) && !missing.contains(delta) {
                    return Some((e, delta));
                }
            }
        }
        None
    }

    /// Record the complete phase tail and grow the next phase.
    pub fn next_phase(&mut self, graph: &Multigraph, phi: &PartialColoring) -> Result<(), GrowthError> {
        if self.frontier != Frontier::Phase {
            return Err(GrowthError::WrongFrontier {
                op: "next_phase",
                frontier: self.frontier,
            });
        }
        let (e, key) = self
            .phase_extending_edge(graph, phi)
            .ok_or(GrowthError::NoPhaseEdge)?;
        let fresh_part = self.tree.vertices_after(self.final_len());
        let delta_n = self.connecting_color();
        let gamma = phi
            .missing_union(fresh_part.iter().copied())
            .iter()
            .find(|&c| c != delta_n)
            .ok_or(GrowthError::NoFreshColor)?;
        let missing = missing_union(phi, &self.tree);
        let used = phi.color(e).unwrap();
        let mut next: Reservation = self
            .current_reservation()
            .iter()
            .filter(|(delta, _)| !missing.contains(**delta))
            .map(|(&d, &p)| (d, p))
            .collect();
        let pair = next.get_mut(&key).unwrap();
        let keep = if pair[0] == used { pair[1] } else { pair[0] };
        *pair = [keep.min(gamma), keep.max(gamma)];
        self.phase_ends.push(self.tree.len());
        self.phase_edges.push(e);
        self.reserved.push(next);
        let mut tree = self.tree.clone();
        tree.push(graph, e).expect("phase edge is a boundary edge");
        self.tree = self.extend_phase(graph, phi, tree);
        Ok(())
    }

    /// Colors missing below the last trunk vertex that are free for swaps:
    /// not missing at the uncolored edge, not used on the tree edges outside
    /// the last stage, not reserved for a connecting color that is still
    /// present there, and not a connecting color present in the final part.
    pub fn b_palette(&self, phi: &PartialColoring) -> ColorSet {
        let t = &self.tree;
        let u = self.trunk_branch().last_trunk;
        let upto = t.edges_to(u).unwrap();
        let below = &t.vertices()[..upto];
        let missing_below = phi.missing_union(below.iter().copied());
        let mut out = missing_below.clone();
        let (a, b) = (t.vertices()[0], t.vertices()[1]);
        out = out.difference(&phi.missing_union([a, b]));
        let used: ColorSet = t.edges()[self.stage_len()..upto]
            .iter()
            .filter_map(|&e| phi.color(e))
            .collect();
        out = out.difference(&used);
        let s_n = self.connecting_set();
        let mut reserved = ColorSet::new();
        for (&delta, pair) in self.current_reservation() {
            if s_n.contains(delta) && !missing_below.contains(delta) {
                reserved.insert(pair[0]);
                reserved.insert(pair[1]);
            }
        }
        out = out.difference(&reserved);
        let final_missing = phi.missing_union(t.vertices()[..self.final_len() + 1].iter().copied());
        out.difference(&s_n.difference(&final_missing))
    }
}

/// Plain-data form of a [`TashkinovState`] for certificates and bundles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub edge: EdgeId,
    pub alpha0: Color,
    pub tree_edges: Vec<EdgeId>,
    pub stage_ends: Vec<usize>,
    pub connecting: Vec<Color>,
    pub level_edges: Vec<EdgeId>,
    pub level_ends: Vec<usize>,
    pub phase_edges: Vec<EdgeId>,
    pub phase_ends: Vec<usize>,
    pub reserved: Vec<Vec<(Color, [Color; 2])>>,
    pub frontier: Frontier,
}

impl TashkinovState {
    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            edge: self.edge,
            alpha0: self.alpha0,
            tree_edges: self.tree.edges().to_vec(),
            stage_ends: self.stage_ends.clone(),
            connecting: self.connecting.clone(),
            level_edges: self.level_edges.clone(),
            level_ends: self.level_ends.clone(),
            phase_edges: self.phase_edges.clone(),
            phase_ends: self.phase_ends.clone(),
            reserved: self
                .reserved
                .iter()
                .map(|r| r.iter().map(|(&d, &p)| (d, p)).collect())
                .collect(),
            frontier: self.frontier,
        }
    }

    pub fn from_snapshot(
        graph: &Multigraph,
        snap: &StateSnapshot,
    ) -> Result<Self, super::tree::TreeError> {
        Ok(Self {
            edge: snap.edge,
            alpha0: snap.alpha0,
            tree: OrderedTree::from_edges(graph, &snap.tree_edges)?,
            stage_ends: snap.stage_ends.clone(),
            connecting: snap.connecting.clone(),
            level_edges: snap.level_edges.clone(),
            level_ends: snap.level_ends.clone(),
            phase_edges: snap.phase_edges.clone(),
            phase_ends: snap.phase_ends.clone(),
            reserved: snap
                .reserved
                .iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            frontier: snap.frontier,
        })
    }

    /// Index of the stage whose part contains `v` (0 for the base), or
    /// `stage_ends.len()` when `v` lies beyond the last complete stage.
    pub fn stage_of(&self, v: Vertex) -> Option<usize> {
        let pos = self.tree.position(v)?;
        Some(
            self.stage_ends
                .iter()
                .position(|&end| pos <= end)
                .unwrap_or(self.stage_ends.len()),
        )
    }
}
