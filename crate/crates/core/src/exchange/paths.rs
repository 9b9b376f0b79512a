use std::collections::BTreeSet;

use super::exits::same_edges;
use super::{go, stress, Engine, Flow, Step};
use crate::coloring::{Color, KempeComponent, PartialColoring};
use crate::forest::{
    closure, exit_partition, first_nonelementary, plus_tree, Frontier, OrderedTree, Potential,
    TashkinovState,
};
use crate::graph::{EdgeId, Vertex};

impl Engine<'_> {
    /// Swapping `chain` keeps the `alpha0`/`delta_n` tree paths of the
    /// complete stage `stage`, or some smaller tree is not elementary.
    ///
    /// `keep` is the tree whose missing colors the chain colors come from;
    /// it is used when the outside color has to be renamed first.
    pub fn keep_tree_paths(
        &mut self,
        stage: &TashkinovState,
        delta_n: Color,
        phi: &PartialColoring,
        chain: &KempeComponent,
        keep: &OrderedTree,
        bound: Option<Potential>,
    ) -> Step<()> {
        const SITE: &str = "keep-tree-paths";
        let g = self.graph;
        if !matches!(stage.frontier, Frontier::Base | Frontier::Stage) {
            return Err(stress(SITE, "tail is not a stage"));
        }
        let alpha0 = stage.alpha0;
        let mut pi = phi.clone();
        pi.swap(g, chain)?;
        if self.same_tree_paths(&stage.tree, phi, &pi, alpha0, delta_n) {
            self.record_kept(&stage.tree, phi, &pi, alpha0, delta_n);
            return Ok(Flow::Go(()));
        }

        let special = |c: Color| c == alpha0 || c == delta_n;
        let (mut a1, a2) = if special(chain.alpha) && !special(chain.beta) {
            (chain.beta, chain.alpha)
        } else {
            (chain.alpha, chain.beta)
        };
        if !special(a2) {
            return Err(stress(SITE, "chain avoids both path colors yet moved a path"));
        }
        if a1 == delta_n {
            return Err(stress(SITE, "chain uses the connecting color on the wrong side"));
        }
        let mut phi = phi.clone();
        let mut chain = chain.clone();
        let (u, v) = g.ends(stage.edge);
        let mut spare = phi.missing_union([u, v]);
        spare.remove(alpha0);
        if !spare.contains(a1) {
            let target = spare
                .min()
                .ok_or_else(|| stress(SITE, "uncolored edge has one spare color"))?;
            phi.swap_outside(g, &keep.vertex_set(), a1, target)?;
            chain = phi.component(g, chain.start, target, a2)?;
            a1 = target;
        }
        let mut pi = phi.clone();
        pi.swap(g, &chain)?;

        let before = exit_partition(g, &phi, &stage.tree, alpha0, delta_n);
        let after = exit_partition(g, &pi, &stage.tree, alpha0, delta_n);
        for (col, report) in [(&phi, &before), (&pi, &after)] {
            if report.exits.len() >= 2 {
                go!(self.stage_exits(stage, col, alpha0, delta_n, bound));
                return Err(stress(SITE, "stage has two exits and also at most one"));
            }
        }
        if before.exits.is_empty() || after.exits.is_empty() {
            return Err(stress(SITE, "paths moved without an exit to absorb them"));
        }
        let (mut base, mut x) = (phi, before.exits[0].tree_end());
        let mut w = after.exits[0].tree_end();
        if x == w {
            return Err(stress(SITE, "exit kept its vertex while tree paths moved"));
        }
        let pos = |v: Vertex| stage.tree.position(v).unwrap();
        if pos(w) > pos(x) {
            base = pi;
            std::mem::swap(&mut x, &mut w);
        }
        let report = exit_partition(g, &base, &stage.tree, alpha0, delta_n);
        if !report
            .tree_paths
            .iter()
            .any(|p| p.tree_end() == w || p.far_end() == w)
        {
            return Err(stress(SITE, "second exit vertex is not on a tree path"));
        }
        let exit = report
            .exits
            .iter()
            .find(|p| p.tree_end() == x)
            .ok_or_else(|| stress(SITE, "exit vanished"))?
            .clone();

        let s = stage.stage_of(x).unwrap();
        let first = if s < stage.stage_ends.len() {
            stage.prefix(stage.stage_ends[s])
        } else {
            stage.clone()
        };
        let forbid = [alpha0, a1, a2];
        let r = self.grow_nonexit(stage, &first, s, base, x, exit.edges, delta_n, &forbid, bound)?;
        Ok(Flow::Done(r))
    }

    /// Repeatedly reroute the exit at the latest vertex until a stage-like
    /// tree stops being elementary.
    #[allow(clippy::too_many_arguments)]
    fn grow_nonexit(
        &mut self,
        stage: &TashkinovState,
        first: &TashkinovState,
        s: usize,
        base: PartialColoring,
        x0: Vertex,
        exit_edges: Vec<EdgeId>,
        delta_n: Color,
        forbid: &[Color],
        bound: Option<Potential>,
    ) -> Result<super::Reduction, super::Stress> {
        const SITE: &str = "grow-nonexit";
        let g = self.graph;
        let alpha0 = stage.alpha0;
        let mut t = first.clone();
        let mut xi_prev = base;
        let mut x = x0;
        let mut path = exit_edges;
        let mut gamma_prev = alpha0;
        let mut beta_prev = delta_n;
        let mut beta = preferred_missing(&xi_prev, x, gamma_prev)
            .ok_or_else(|| stress(SITE, "exit vertex misses no color"))?;
        let mut prev_part: Option<BTreeSet<Vertex>> = None;

        for _ in 0..=g.vertex_count() {
            self.tick(SITE)?;
            let mut phi_i = xi_prev.clone();
            if beta != gamma_prev {
                phi_i.swap_outside(g, &t.tree.vertex_set(), beta, gamma_prev)?;
            }
            let comp = phi_i.component(g, x, beta, beta_prev)?;
            if !same_edges(&comp.edges, &path) {
                return Err(stress(SITE, "exit path did not survive the outside swap"));
            }
            let mut pi_i = phi_i;
            pi_i.swap(g, &comp)?;

            let tx = t.tree.prefix_at(x).expect("exit vertex is in the tree");
            let part: BTreeSet<Vertex> = tx.vertices().iter().copied().collect();
            let gamma = match &prev_part {
                None => {
                    let mut m = pi_i.missing_union(tx.vertices().iter().copied());
                    for &c in forbid.iter().chain([&beta, &beta_prev]) {
                        m.remove(c);
                    }
                    m.min()
                }
                Some(prev) => {
                    let mut m = pi_i.missing_union(part.difference(prev).copied());
                    m.remove(beta_prev);
                    m.min()
                }
            }
            .ok_or_else(|| stress(SITE, "no fresh color for the reroute"))?;
            if gamma == beta {
                return Err(stress(SITE, "reroute color equals the exit color"));
            }

            let (q_vertices, q_edges) = exit_walk(g, &pi_i, &t.tree, x, beta, gamma)
                .ok_or_else(|| stress(SITE, "rerouted walk returns to the tree"))?;
            let mut inside = t.tree.vertex_set();
            for &v in &q_vertices {
                inside.insert(v);
            }
            let mut xi = pi_i;
            xi.swap_outside(g, &inside, beta, gamma)?;

            let seed = if s == 0 {
                tx.clone()
            } else {
                let prev = stage.tree.prefix(stage.stage_ends[s - 1]);
                let mut u = plus_tree(g, &xi, &prev, alpha0, stage.connecting[s - 1]);
                absorb(g, &mut u, tx.edges());
                u
            };
            let next = stage.with_stage_tail(s, closure(g, &xi, seed));
            if let Some(len) = first_nonelementary(&xi, &next.tree) {
                return self.reduced(next.prefix(len), &xi, bound, SITE);
            }
            let Some(idx) = q_vertices.iter().rposition(|&v| next.tree.contains(v)) else {
                return Err(stress(SITE, "new tree misses the rerouted walk"));
            };
            let x_next = q_vertices[idx];
            let beta_next = preferred_missing(&xi, x_next, gamma)
                .ok_or_else(|| stress(SITE, "exit vertex misses no color"))?;
            if x_next == x || missing_in(&xi, &next.tree, beta) {
                return Err(stress(SITE, "reroute stopped with an elementary tree"));
            }
            prev_part = Some(part);
            path = q_edges[idx..].to_vec();
            t = next;
            xi_prev = xi;
            gamma_prev = gamma;
            beta_prev = beta;
            beta = beta_next;
            x = x_next;
        }
        Err(stress(SITE, "reroute did not terminate"))
    }
}

/// Smallest color missing at `v` other than `avoid`, or `avoid` if it is
/// the only one.
fn preferred_missing(phi: &PartialColoring, v: Vertex, avoid: Color) -> Option<Color> {
    let m = phi.missing(v);
    let first = m.iter().find(|&c| c != avoid);
    first.or(m.min())
}

fn missing_in(phi: &PartialColoring, tree: &OrderedTree, c: Color) -> bool {
    tree.vertices().iter().any(|&v| phi.is_missing(v, c))
}

/// Walk from `x` along `first`, then alternately `second` and `first`,
/// until the walk stops. `None` if it re-enters `tree`.
fn exit_walk(
    g: &crate::graph::Multigraph,
    phi: &PartialColoring,
    tree: &OrderedTree,
    x: Vertex,
    first: Color,
    second: Color,
) -> Option<(Vec<Vertex>, Vec<EdgeId>)> {
    let mut vs = vec![x];
    let mut es = Vec::new();
    let mut cur = x;
    let mut want = first;
    while let Some(e) = phi.edge_at(cur, want) {
        cur = g.other(e, cur);
        if tree.contains(cur) {
            return None;
        }
        es.push(e);
        vs.push(cur);
        want = if want == first { second } else { first };
    }
    Some((vs, es))
}

/// Push every edge of `edges` that attaches to `tree`, until none does.
fn absorb(g: &crate::graph::Multigraph, tree: &mut OrderedTree, edges: &[EdgeId]) {
    loop {
        let mut progress = false;
        for &e in edges {
            if !tree.contains_edge(e) && tree.push(g, e).is_ok() {
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
}
