use std::cmp::Reverse;
use std::collections::BTreeSet;

use super::{go, stress, Engine, Flow, Step};
use crate::coloring::{Color, PartialColoring};
use crate::forest::{
    closure, exit_partition, first_nonelementary, plus_tree, Chain, Frontier, Potential,
    TashkinovState,
};

impl Engine<'_> {
    /// Show that a complete stage has at most one `alpha`/`delta` exit, or
    /// shrink it into a smaller non-elementary tree.
    ///
    /// `stage` must have a complete stage (or base) as its tail, with `alpha`
    /// missing in it and absent from its boundary.
    pub fn stage_exits(
        &mut self,
        stage: &TashkinovState,
        phi: &PartialColoring,
        alpha: Color,
        delta: Color,
        bound: Option<Potential>,
    ) -> Step<()> {
        const SITE: &str = "stage-exits";
        let g = self.graph;
        if !matches!(stage.frontier, Frontier::Base | Frontier::Stage) {
            return Err(stress(SITE, "tail is not a stage"));
        }
        let mut t = stage.clone();
        let mut phi = phi.clone();
        let (mut a, mut d) = (alpha, delta);
        for round in 0..=g.vertex_count() {
            self.tick(SITE)?;
            if let Some(len) = first_nonelementary(&phi, &t.tree) {
                let r = self.reduced(t.prefix(len), &phi, bound, SITE)?;
                return Ok(Flow::Done(r));
            }
            let report = exit_partition(g, &phi, &t.tree, a, d);
            if report.exits.len() <= 1 {
                if round == 0 {
                    self.record_exit_unique(&t.tree, &phi, a, d, report.exits.len());
                    return Ok(Flow::Go(()));
                }
                return Err(stress(SITE, "shrunk tree lost its exit pair while elementary"));
            }
            let (px, py) = top_two_exits(&t, report.exits);
            let x = px.tree_end();
            let j = t.stage_of(x).expect("exit starts in the tree");
            let beta = phi
                .missing(x)
                .min()
                .ok_or_else(|| stress(SITE, "exit vertex misses no color"))?;
            let mut phi0 = phi.clone();
            phi0.swap_outside(g, &t.tree.vertex_set(), a, beta)?;
            let comp = phi0.component(g, x, beta, d)?;
            if !same_edges(&comp.edges, &px.edges) {
                return Err(stress(SITE, "exit path changed under the outside swap"));
            }
            let mut pi0 = phi0;
            pi0.swap(g, &comp)?;

            let tx = t.tree.prefix_at(x).expect("exit vertex is in the tree");
            let seed = if j == 0 {
                tx
            } else {
                let prev = t.tree.prefix(t.stage_ends[j - 1]);
                let plus = plus_tree(g, &pi0, &prev, t.alpha0, t.connecting[j - 1]);
                if plus.len() <= tx.len() && tx.edges()[..plus.len()] == plus.edges()[..] {
                    tx
                } else {
                    plus
                }
            };
            let next = t.with_stage_tail(j, closure(g, &pi0, seed));
            if first_nonelementary(&pi0, &next.tree).is_none()
                && (next.tree.contains(px.far_end()) || next.tree.contains(py.far_end()))
            {
                return Err(stress(SITE, "shrunk tree swallowed an exit end"));
            }
            t = next;
            phi = pi0;
            (a, d) = (d, beta);
        }
        Err(stress(SITE, "shrinking did not terminate"))
    }

    /// At most one `alpha`/`delta` exit from a tree whose tail is a complete
    /// stage, level or phase, or a smaller non-elementary tree.
    pub fn part_exits(
        &mut self,
        state: &TashkinovState,
        phi: &PartialColoring,
        alpha: Color,
        delta: Color,
        bound: Option<Potential>,
    ) -> Step<()> {
        const SITE: &str = "part-exits";
        let g = self.graph;
        if matches!(state.frontier, Frontier::Base | Frontier::Stage) {
            return self.stage_exits(state, phi, alpha, delta, bound);
        }
        let stage_len = state.stage_len();
        let delta_n = state.connecting_color();
        let mut t = state.clone();
        let mut phi = phi.clone();
        let (mut a, mut d) = (alpha, delta);
        for round in 0..=g.vertex_count() {
            self.tick(SITE)?;
            if let Some(len) = first_nonelementary(&phi, &t.tree) {
                let r = self.reduced(t.prefix(len), &phi, bound, SITE)?;
                return Ok(Flow::Done(r));
            }
            let mut report = exit_partition(g, &phi, &t.tree, a, d);
            if report.exits.len() <= 1 {
                if round == 0 {
                    self.record_exit_unique(&t.tree, &phi, a, d, report.exits.len());
                    return Ok(Flow::Go(()));
                }
                return Err(stress(SITE, "new tree lost its exit pair while elementary"));
            }
            if round == 0 {
                let (u, v) = g.ends(t.edge);
                let mut mg = phi.missing_union([u, v]);
                mg.remove(t.alpha0);
                if !mg.contains(a) {
                    let target = mg
                        .min()
                        .ok_or_else(|| stress(SITE, "uncolored edge has one spare color"))?;
                    phi.swap_outside(g, &t.tree.vertex_set(), a, target)?;
                    a = target;
                    report = exit_partition(g, &phi, &t.tree, a, d);
                    if report.exits.len() < 2 {
                        return Err(stress(SITE, "renaming the outside color changed the exits"));
                    }
                }
            }
            let (px, py) = top_two_exits(&t, report.exits);
            let x = px.tree_end();
            let pos = t.tree.position(x).expect("exit starts in the tree");
            if pos <= stage_len {
                let stage = t.prefix(stage_len);
                go!(self.stage_exits(&stage, &phi, a, d, bound));
                return Err(stress(SITE, "two exits from a stage that has at most one"));
            }
            let below = t
                .complete_ends()
                .into_iter()
                .filter(|&e| e < pos)
                .max()
                .unwrap_or(stage_len);
            let beta = phi
                .missing(x)
                .min()
                .ok_or_else(|| stress(SITE, "exit vertex misses no color"))?;
            let mut phi0 = phi.clone();
            phi0.swap_outside(g, &t.tree.vertex_set(), a, beta)?;
            let comp = phi0.component(g, x, beta, d)?;
            if !same_edges(&comp.edges, &px.edges) {
                return Err(stress(SITE, "exit path changed under the outside swap"));
            }
            let stage = t.prefix(stage_len);
            let keep = t.tree.prefix(below);
            go!(self.keep_tree_paths(&stage, delta_n, &phi0, &comp, &keep, bound));
            let mut pi0 = phi0;
            pi0.swap(g, &comp)?;

            let mut next = t.prefix_at(x).expect("exit vertex is in the tree");
            next.tree = match next.frontier {
                Frontier::Phase => next.extend_phase(g, &pi0, next.tree.clone()),
                Frontier::Level => closure(g, &pi0, next.tree.clone()),
                _ => return Err(stress(SITE, "exit vertex left the levels")),
            };
            if first_nonelementary(&pi0, &next.tree).is_none()
                && (next.tree.contains(px.far_end()) || next.tree.contains(py.far_end()))
            {
                return Err(stress(SITE, "new tree swallowed an exit end"));
            }
            t = next;
            phi = pi0;
            (a, d) = (d, beta);
        }
        Err(stress(SITE, "exit elimination did not terminate"))
    }
}

/// The exit leaving from the latest tree vertex, and one other exit.
fn top_two_exits(t: &TashkinovState, mut exits: Vec<Chain>) -> (Chain, Chain) {
    exits.sort_by_key(|c| (Reverse(t.tree.position(c.tree_end()).unwrap()), c.edges[0]));
    let mut it = exits.into_iter();
    (it.next().unwrap(), it.next().unwrap())
}

pub(super) fn same_edges(a: &[usize], b: &[usize]) -> bool {
    a.iter().collect::<BTreeSet<_>>() == b.iter().collect::<BTreeSet<_>>()
}
