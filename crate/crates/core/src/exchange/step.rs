use super::{go, stress, Engine, Flow, Step};
use crate::coloring::{Color, PartialColoring};
use crate::forest::check::verify_state;
use crate::forest::{first_nonelementary, Frontier, Potential, TashkinovState};
use crate::graph::Vertex;

/// The tree being reduced together with the pieces every exchange needs.
#[derive(Debug, Clone)]
pub struct Frame {
    pub state: TashkinovState,
    pub bound: Potential,
    /// The state cut back to its last complete stage.
    pub stage: TashkinovState,
    /// Connecting color of that stage.
    pub delta_n: Color,
}

impl Frame {
    /// Needs a state at the level or phase frontier.
    pub fn new(state: TashkinovState) -> Option<Self> {
        if !matches!(state.frontier, Frontier::Level | Frontier::Phase) {
            return None;
        }
        let delta_n = state.connecting_color();
        let stage = state.prefix(state.stage_len());
        let bound = state.potential();
        Some(Self {
            state,
            bound,
            stage,
            delta_n,
        })
    }
}

impl Engine<'_> {
    /// Swap the `e1`/`e2` component at `start`, keeping every structural
    /// property of the frame's tree.
    ///
    /// With `ends = Some((v, w))` the component at `v` must be a path ending
    /// at `w`, and the swapped component must avoid both. If the exchange
    /// cannot be kept structural, a smaller non-elementary tree is returned.
    pub fn exchange(
        &mut self,
        frame: &Frame,
        phi: &PartialColoring,
        e1: Color,
        e2: Color,
        ends: Option<(Vertex, Vertex)>,
        start: Vertex,
    ) -> Step<PartialColoring> {
        const SITE: &str = "exchange";
        let g = self.graph;
        self.tick(SITE)?;
        if let Some((v, w)) = ends {
            let pv = phi.component(g, v, e1, e2)?;
            if !(pv.has_end(v) && pv.has_end(w)) {
                return self.linked_ends_failed(frame, phi, e1, e2, v, w);
            }
        }
        let r = phi.component(g, start, e1, e2)?;
        if let Some((v, w)) = ends {
            if r.contains_vertex(v) || r.contains_vertex(w) {
                return Err(stress(SITE, "swapped chain meets a protected end"));
            }
        }
        let keep = frame.state.tree.prefix(frame.state.final_len());
        go!(self.keep_tree_paths(&frame.stage, frame.delta_n, phi, &r, &keep, Some(frame.bound)));
        let mut pi = phi.clone();
        pi.swap(g, &r)?;
        if self.structure_kept(frame, &pi) {
            return Ok(Flow::Go(pi));
        }
        if let Some(red) = self.salvage(&frame.state, &[&pi, phi], Some(frame.bound)) {
            return Ok(Flow::Done(red));
        }
        Err(stress(SITE, "exchange broke the tree and left nothing smaller"))
    }

    /// The tree is still valid and only its last vertex repeats a missing color.
    pub fn structure_kept(&self, frame: &Frame, pi: &PartialColoring) -> bool {
        verify_state(self.graph, pi.assignment(), pi.k(), &frame.state).is_ok()
            && first_nonelementary(pi, &frame.state.tree) == Some(frame.state.tree.len())
    }

    /// `v` and `w` should be joined by an `e1`/`e2` path. When they are not,
    /// swapping at `w` or a complete part with two exits yields a smaller
    /// non-elementary tree.
    fn linked_ends_failed(
        &mut self,
        frame: &Frame,
        phi: &PartialColoring,
        e1: Color,
        e2: Color,
        v: Vertex,
        w: Vertex,
    ) -> Step<PartialColoring> {
        const SITE: &str = "linked-ends";
        let g = self.graph;
        let bound = Some(frame.bound);
        let mut xi = phi.clone();
        xi.swap_at(g, w, e1, e2)?;
        if let Some(st) = frame.state.prefix_at(w) {
            if let Some(r) = self.try_reduced(st, &xi, bound, SITE) {
                return Ok(Flow::Done(r));
            }
        }
        if let Some(r) = self.salvage(&frame.state, &[&xi, phi], bound) {
            return Ok(Flow::Done(r));
        }
        for end in frame.state.complete_ends() {
            let part = frame.state.prefix(end);
            if !(part.tree.contains(v) && part.tree.contains(w)) {
                continue;
            }
            let m = crate::forest::missing_union(phi, &part.tree);
            let on_boundary = part
                .tree
                .boundary(g)
                .iter()
                .any(|&e| phi.color(e) == Some(e1));
            if !m.contains(e1) || on_boundary {
                continue;
            }
            go!(self.part_exits(&part, phi, e1, e2, bound));
        }
        Err(stress(SITE, format!("{v} and {w} are not linked by a {e1}/{e2} path")))
    }
}
