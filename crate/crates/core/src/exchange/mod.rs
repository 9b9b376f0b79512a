//! Kempe-exchange procedures that either keep a tree's structure intact or
//! hand back a smaller tree that is not elementary.
//!
//! Every procedure checks its claims as it goes. A claim that fails and
//! cannot be repaired becomes a [`Stress`] diagnostic instead of a panic.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{Color, ColoringError, PartialColoring};
use crate::forest::check::{potential_of, verify_state, Snapshot};
use crate::forest::{
    exit_partition, first_nonelementary, OrderedTree, Potential, StateSnapshot, TashkinovState,
};
use crate::graph::{EdgeId, Multigraph, Vertex};

mod exits;
mod paths;
mod step;

pub use step::Frame;

/// A claim that failed during an exchange procedure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("{site}: {detail}")]
pub struct Stress {
    pub site: String,
    pub detail: String,
}

pub fn stress(site: &str, detail: impl Into<String>) -> Stress {
    Stress {
        site: site.to_string(),
        detail: detail.into(),
    }
}

impl From<ColoringError> for Stress {
    fn from(e: ColoringError) -> Self {
        stress("kernel", e.to_string())
    }
}

/// A verified non-elementary tree with the coloring that makes it so.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub state: TashkinovState,
    pub coloring: PartialColoring,
    pub via: &'static str,
}

#[derive(Debug, Clone)]
pub enum Flow<T> {
    Go(T),
    Done(Reduction),
}

pub type Step<T> = Result<Flow<T>, Stress>;

/// Unwrap a [`Flow::Go`] or return the reduction from the enclosing function.
macro_rules! go {
    ($e:expr) => {
        match $e? {
            $crate::exchange::Flow::Go(v) => v,
            $crate::exchange::Flow::Done(r) => return Ok($crate::exchange::Flow::Done(r)),
        }
    };
}
pub(crate) use go;

/// Evidence recorded by the engine, checkable without the engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// The tree paths of a complete stage are the same before and after an exchange.
    TreePathsKept {
        stage: Vec<EdgeId>,
        alpha0: Color,
        delta: Color,
        k: usize,
        before: Vec<Color>,
        after: Vec<Color>,
        path_edges: Vec<EdgeId>,
    },
    /// A tree has at most one exit for a color pair.
    ExitUnique {
        tree: Vec<EdgeId>,
        alpha: Color,
        delta: Color,
        k: usize,
        colors: Vec<Color>,
        exits: usize,
    },
    /// A valid tree that is not elementary.
    Reduced {
        state: StateSnapshot,
        k: usize,
        colors: Vec<Color>,
        from: Option<Potential>,
        to: Potential,
        via: String,
    },
}

/// Re-check a certificate with the independent structural code.
pub fn audit(graph: &Multigraph, cert: &Certificate) -> Result<(), String> {
    match cert {
        Certificate::TreePathsKept {
            stage,
            alpha0,
            delta,
            k,
            before,
            after,
            path_edges,
        } => {
            let set = edge_vertices(graph, stage);
            let a = path_edge_set(&Snapshot::new(graph, before, *k), &set, *alpha0, *delta);
            let b = path_edge_set(&Snapshot::new(graph, after, *k), &set, *alpha0, *delta);
            let claimed: BTreeSet<EdgeId> = path_edges.iter().copied().collect();
            if a != b {
                return Err(format!("tree paths differ: {a:?} vs {b:?}"));
            }
            if a != claimed {
                return Err(format!("claimed tree path edges {claimed:?}, found {a:?}"));
            }
            Ok(())
        }
        Certificate::ExitUnique {
            tree,
            alpha,
            delta,
            k,
            colors,
            exits,
        } => {
            let set = edge_vertices(graph, tree);
            let snap = Snapshot::new(graph, colors, *k);
            let crossing = snap
                .boundary(&set)
                .iter()
                .filter(|(_, c)| *c == Some(*alpha) || *c == Some(*delta))
                .count();
            let returning = snap.tree_paths(&set, *alpha, *delta).len();
            let found = crossing - 2 * returning;
            if found != *exits || found > 1 {
                return Err(format!("claimed {exits} exits, found {found}"));
            }
            Ok(())
        }
        Certificate::Reduced {
            state,
            k,
            colors,
            from,
            to,
            ..
        } => {
            let st = TashkinovState::from_snapshot(graph, state).map_err(|e| e.to_string())?;
            verify_state(graph, colors, *k, &st).map_err(|e| e.to_string())?;
            if Snapshot::new(graph, colors, *k).elementary(st.tree.vertices()) {
                return Err("reduced tree is elementary".into());
            }
            let p = potential_of(graph, &st);
            if p != *to {
                return Err(format!("potential recomputes to {p}, claimed {to}"));
            }
            if let Some(f) = from {
                if p >= *f {
                    return Err(format!("potential {p} does not drop below {f}"));
                }
            }
            Ok(())
        }
    }
}

fn edge_vertices(graph: &Multigraph, edges: &[EdgeId]) -> BTreeSet<Vertex> {
    edges
        .iter()
        .flat_map(|&e| {
            let (u, v) = graph.ends(e);
            [u, v]
        })
        .collect()
}

fn path_edge_set(
    snap: &Snapshot<'_>,
    set: &BTreeSet<Vertex>,
    a: Color,
    b: Color,
) -> BTreeSet<EdgeId> {
    snap.tree_paths(set, a, b)
        .into_iter()
        .flat_map(|(_, es)| es)
        .collect()
}

/// Shared context for the exchange procedures.
pub struct Engine<'g> {
    pub graph: &'g Multigraph,
    pub certificates: Vec<Certificate>,
    pub keep_certificates: bool,
    pub certificates_issued: usize,
    pub exchanges: usize,
    pub step_budget: usize,
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g Multigraph) -> Self {
        Self {
            graph,
            certificates: Vec::new(),
            keep_certificates: true,
            certificates_issued: 0,
            exchanges: 0,
            step_budget: usize::MAX,
        }
    }

    fn record(&mut self, cert: impl FnOnce() -> Certificate) {
        self.certificates_issued += 1;
        if self.keep_certificates {
            self.certificates.push(cert());
        }
    }

    pub(crate) fn tick(&mut self, site: &str) -> Result<(), Stress> {
        self.exchanges += 1;
        if self.exchanges > self.step_budget {
            return Err(stress(site, "exchange budget exhausted"));
        }
        Ok(())
    }

    /// Validate a candidate reduction; `None` if any check fails.
    pub fn try_reduced(
        &mut self,
        state: TashkinovState,
        phi: &PartialColoring,
        bound: Option<Potential>,
        via: &'static str,
    ) -> Option<Reduction> {
        verify_state(self.graph, phi.assignment(), phi.k(), &state).ok()?;
        first_nonelementary(phi, &state.tree)?;
        let to = state.potential();
        if bound.is_some_and(|b| to >= b) {
            return None;
        }
        self.record(|| Certificate::Reduced {
            state: state.snapshot(),
            k: phi.k(),
            colors: phi.assignment().to_vec(),
            from: bound,
            to,
            via: via.to_string(),
        });
        Some(Reduction {
            state,
            coloring: phi.clone(),
            via,
        })
    }

    /// Like [`Engine::try_reduced`] but a failed check is a diagnostic.
    pub fn reduced(
        &mut self,
        state: TashkinovState,
        phi: &PartialColoring,
        bound: Option<Potential>,
        via: &'static str,
    ) -> Result<Reduction, Stress> {
        if let Err(v) = verify_state(self.graph, phi.assignment(), phi.k(), &state) {
            return Err(stress(via, format!("claimed reduction is not a valid tree: {v}")));
        }
        if first_nonelementary(phi, &state.tree).is_none() {
            return Err(stress(via, "claimed reduction is elementary"));
        }
        let to = state.potential();
        if let Some(b) = bound {
            if to >= b {
                return Err(stress(via, format!("potential {to} does not drop below {b}")));
            }
        }
        Ok(self.try_reduced(state, phi, bound, via).expect("checked above"))
    }

    /// The smallest valid non-elementary prefix of `state` under one of the
    /// candidate colorings, provided it is smaller than `bound`.
    pub fn salvage(
        &mut self,
        state: &TashkinovState,
        candidates: &[&PartialColoring],
        bound: Option<Potential>,
    ) -> Option<Reduction> {
        for phi in candidates {
            let Some(first) = first_nonelementary(phi, &state.tree) else {
                continue;
            };
            for len in first..=state.tree.len() {
                let prefix = state.prefix(len);
                if let Some(r) = self.try_reduced(prefix, phi, bound, "salvage") {
                    return Some(r);
                }
            }
        }
        None
    }

    /// Whether `after` has the same `alpha0`/`delta` tree paths out of `stage` as `before`.
    pub fn same_tree_paths(
        &self,
        stage: &OrderedTree,
        before: &PartialColoring,
        after: &PartialColoring,
        alpha0: Color,
        delta: Color,
    ) -> bool {
        let a = exit_partition(self.graph, before, stage, alpha0, delta).nonexit_edges();
        let b = exit_partition(self.graph, after, stage, alpha0, delta).nonexit_edges();
        a == b
    }

    fn record_kept(
        &mut self,
        stage: &OrderedTree,
        before: &PartialColoring,
        after: &PartialColoring,
        alpha0: Color,
        delta: Color,
    ) {
        let graph = self.graph;
        self.record(|| Certificate::TreePathsKept {
            stage: stage.edges().to_vec(),
            alpha0,
            delta,
            k: before.k(),
            before: before.assignment().to_vec(),
            after: after.assignment().to_vec(),
            path_edges: exit_partition(graph, before, stage, alpha0, delta).nonexit_edges(),
        });
    }

    fn record_exit_unique(
        &mut self,
        tree: &OrderedTree,
        phi: &PartialColoring,
        alpha: Color,
        delta: Color,
        exits: usize,
    ) {
        self.record(|| Certificate::ExitUnique {
            tree: tree.edges().to_vec(),
            alpha,
            delta,
            k: phi.k(),
            colors: phi.assignment().to_vec(),
            exits,
        });
    }
}
