//! The reduction cascade for a minimally non-elementary tree at the phase
//! frontier.
//!
//! Notation: the branch is `v_0 .. v_t` with edges `f_1 .. f_t`, `u_r` is
//! the last trunk vertex, and `z(c)` is the vertex of the tree minus its
//! last vertex that misses `c`. Every exchange goes through
//! [`Engine::exchange`], which verifies the whole tree afterwards.

use crate::coloring::{Color, ColorSet, PartialColoring};
use crate::exchange::{go, stress, Engine, Flow, Frame, Reduction, Step, Stress};
use crate::forest::{OrderedTree, Reservation, TrunkBranch};
use crate::graph::{EdgeId, Vertex};

pub(super) fn run(eng: &mut Engine<'_>, frame: Frame, phi: &PartialColoring) -> Result<Reduction, Stress> {
    let mut c = Cascade::new(eng, frame);
    match c.closing(phi)? {
        Flow::Done(r) => Ok(r),
        Flow::Go(()) => Err(stress("reduce", "cascade finished without a smaller tree")),
    }
}

struct Cascade<'a, 'g> {
    eng: &'a mut Engine<'g>,
    frame: Frame,
    tb: TrunkBranch,
    final_len: usize,
    connecting: ColorSet,
    reservation: Reservation,
    complete_phases: usize,
}

impl<'a, 'g> Cascade<'a, 'g> {
    fn new(eng: &'a mut Engine<'g>, frame: Frame) -> Self {
        let st = &frame.state;
        Self {
            tb: st.trunk_branch(),
            final_len: st.final_len(),
            connecting: st.connecting_set(),
            reservation: st.current_reservation().clone(),
            complete_phases: st.phase_count(),
            eng,
            frame,
        }
    }

    fn tree(&self) -> &OrderedTree {
        &self.frame.state.tree
    }

    fn t(&self) -> usize {
        self.tb.branch_edges.len()
    }

    fn v(&self, i: usize) -> Vertex {
        self.tb.branch[i]
    }

    fn f(&self, i: usize) -> EdgeId {
        self.tb.branch_edges[i - 1]
    }

    fn vt(&self) -> Vertex {
        self.tree().last_vertex()
    }

    fn ur(&self) -> Vertex {
        self.tb.last_trunk
    }

    fn pos(&self, v: Vertex) -> usize {
        self.tree().position(v).expect("vertex in tree")
    }

    fn in_final(&self, v: Vertex) -> bool {
        self.pos(v) <= self.final_len
    }

    fn final_tree(&self) -> OrderedTree {
        self.tree().prefix(self.final_len)
    }

    fn final_missing(&self, phi: &PartialColoring) -> ColorSet {
        phi.missing_union(self.tree().vertices()[..=self.final_len].iter().copied())
    }

    fn g_missing(&self, phi: &PartialColoring) -> ColorSet {
        let v = self.tree().vertices();
        phi.missing_union([v[0], v[1]])
    }

    /// The vertex before the last one that misses `c`.
    fn z(&self, phi: &PartialColoring, c: Color) -> Result<Vertex, Stress> {
        let vs = self.tree().vertices();
        vs[..vs.len() - 1]
            .iter()
            .copied()
            .find(|&v| phi.is_missing(v, c))
            .ok_or_else(|| stress("reduce", format!("no vertex below the last misses {c}")))
    }

    fn pick_alpha(&self, phi: &PartialColoring) -> Result<Color, Stress> {
        let vs = self.tree().vertices();
        let below = phi.missing_union(vs[..vs.len() - 1].iter().copied());
        phi.missing(self.vt())
            .intersection(&below)
            .min()
            .ok_or_else(|| stress("reduce", "last vertex shares no missing color"))
    }

    /// Reservation pair for `delta`.
    fn pair(&self, delta: Color) -> Result<[Color; 2], Stress> {
        self.reservation
            .get(&delta)
            .copied()
            .ok_or_else(|| stress("reduce", format!("no reservation for connecting color {delta}")))
    }

    fn pair_other(&self, delta: Color, avoid: Option<Color>) -> Result<Color, Stress> {
        let [a, b] = self.pair(delta)?;
        Ok(if Some(a) == avoid { b } else { a })
    }

    fn reserved_for(&self, c: Color) -> Option<Color> {
        self.reservation
            .iter()
            .find(|(_, p)| p.contains(&c))
            .map(|(&d, _)| d)
    }

    fn b(&self, phi: &PartialColoring) -> ColorSet {
        self.frame.state.b_palette(phi)
    }

    /// `c` is a connecting color missing at a vertex of `T(u_r)` outside the
    /// final part (at or before `u_r` when `with_ur`).
    fn connecting_in_trunk_tail(&self, phi: &PartialColoring, c: Color, with_ur: bool) -> bool {
        if !self.connecting.contains(c) {
            return false;
        }
        let top = self.pos(self.ur());
        let vs = self.tree().vertices();
        let end = if with_ur { top } else { top.saturating_sub(1) };
        (self.final_len + 1..=end).any(|p| phi.is_missing(vs[p], c))
    }

    fn xchg(
        &mut self,
        phi: &PartialColoring,
        e1: Color,
        e2: Color,
        ends: Option<(Vertex, Vertex)>,
        start: Vertex,
    ) -> Step<PartialColoring> {
        self.eng.exchange(&self.frame, phi, e1, e2, ends, start)
    }

    fn done(&mut self, state: crate::forest::TashkinovState, phi: &PartialColoring, via: &'static str) -> Step<()> {
        let bound = Some(self.frame.bound);
        Ok(Flow::Done(self.eng.reduced(state, phi, bound, via)?))
    }

    /// Closing argument: clean the trunk, then delete `u_r`.
    fn closing(&mut self, phi: &PartialColoring) -> Step<()> {
        const SITE: &str = "closing";
        if self.in_final(self.ur()) {
            go!(self.path_tail(phi));
            return Err(stress(SITE, "tail beyond the final part is a path"));
        }
        let mut phi = phi.clone();
        for _ in 0..4 {
            let alpha = match self.ready_alpha(&phi) {
                Some(a) => a,
                None => {
                    let (pi, a) = go!(self.trunk_clean(&phi));
                    phi = pi;
                    a
                }
            };
            let (ur, v1, f1) = (self.ur(), self.v(1), self.f(1));
            let theta = phi.color(f1).ok_or_else(|| stress(SITE, "branch edge uncolored"))?;
            let guarded = self.connecting.iter().any(|d| {
                phi.is_missing(ur, d) && self.reservation.get(&d).is_some_and(|p| p.contains(&theta))
            });
            if !phi.is_missing(ur, theta) && !guarded {
                return self.drop_last_trunk(&phi);
            }
            let loose = self.connecting.contains(theta) && !self.final_missing(&phi).contains(theta);
            if !loose {
                if phi.is_missing(ur, theta) {
                    let za = self.z(&phi, alpha)?;
                    phi = go!(self.xchg(&phi, alpha, theta, Some((za, ur)), v1));
                } else {
                    let delta = self
                        .reserved_for(theta)
                        .ok_or_else(|| stress(SITE, "branch color is not reserved"))?;
                    let gamma = self.pair_other(delta, Some(theta))?;
                    let (za, zg) = (self.z(&phi, alpha)?, self.z(&phi, gamma)?);
                    phi = go!(self.xchg(&phi, alpha, gamma, Some((za, zg)), v1));
                }
            } else {
                let [g1, _] = self.pair(theta)?;
                phi = go!(self.beta_swap(&phi, alpha, g1));
                let zg = self.z(&phi, g1)?;
                phi = go!(self.xchg(&phi, g1, theta, Some((zg, ur)), v1));
            }
        }
        Err(stress(SITE, "trunk cleaning did not reach the deletion case"))
    }

    /// With a one-edge branch, a color missing at `v_1` that is free in the
    /// trunk and differs from the branch color.
    fn ready_alpha(&self, phi: &PartialColoring) -> Option<Color> {
        if self.t() != 1 {
            return None;
        }
        let mut cands = phi.missing(self.v(1)).intersection(&self.b(phi));
        if let Some(c) = phi.color(self.f(1)) {
            cands.remove(c);
        }
        cands.min()
    }

    /// The tree without its last trunk vertex, which is a leaf.
    fn drop_last_trunk(&mut self, phi: &PartialColoring) -> Step<()> {
        let g = self.eng.graph;
        let cut = self.pos(self.ur()) - 1;
        let edges: Vec<EdgeId> = self
            .tree()
            .edges()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != cut)
            .map(|(_, &e)| e)
            .collect();
        let tree = OrderedTree::from_edges(g, &edges)
            .map_err(|e| stress("drop-last-trunk", e.to_string()))?;
        let mut state = self.frame.state.clone();
        state.tree = tree;
        self.done(state, phi, "drop-last-trunk")
    }

    /// Make the branch a single edge whose far end misses a free trunk color.
    fn trunk_clean(&mut self, phi: &PartialColoring) -> Step<(PartialColoring, Color)> {
        const SITE: &str = "trunk-clean";
        let (ur, vt, f1) = (self.ur(), self.vt(), self.f(1));
        let alpha0 = self.frame.state.alpha0;
        let mut phi = phi.clone();
        let mut alpha = self.pick_alpha(&phi)?;
        let za = self.z(&phi, alpha)?;
        if self.pos(za) > self.pos(ur) {
            go!(self.branch_cut(&phi, alpha));
            return Err(stress(SITE, "shared color sits on the branch"));
        }
        if alpha == alpha0 {
            let mut spare = self.g_missing(&phi);
            spare.remove(alpha0);
            let a2 = spare.min().ok_or_else(|| stress(SITE, "uncolored edge has one spare color"))?;
            let (z2, za) = (self.z(&phi, a2)?, self.z(&phi, alpha)?);
            phi = go!(self.xchg(&phi, alpha, a2, Some((z2, za)), vt));
            alpha = a2;
        }
        if self.connecting_in_trunk_tail(&phi, alpha, true) {
            let gamma = self.pair_other(alpha, phi.color(f1))?;
            let (zg, za) = (self.z(&phi, gamma)?, self.z(&phi, alpha)?);
            phi = go!(self.xchg(&phi, gamma, alpha, Some((zg, za)), vt));
            alpha = gamma;
        }
        let f1_color = phi.color(f1);
        if self.z(&phi, alpha)? == ur {
            let mut b = self.b(&phi);
            if let Some(c) = f1_color {
                b.remove(c);
            }
            let eta = b.min().ok_or_else(|| stress(SITE, "free trunk palette too small"))?;
            let ze = self.z(&phi, eta)?;
            let pi = go!(self.xchg(&phi, eta, alpha, Some((ze, ur)), vt));
            if self.t() >= 2 {
                let mut b = self.b(&pi);
                b.remove(eta);
                if let Some(c) = pi.color(f1) {
                    b.remove(c);
                }
                let beta = b.min().ok_or_else(|| stress(SITE, "free trunk palette too small"))?;
                go!(self.beta_swap(&pi, eta, beta));
                return Err(stress(SITE, "free color on a long branch was not absorbed"));
            }
            return self.cleaned(pi, eta);
        }
        let mut b = self.b(&phi);
        b.remove(alpha);
        if let Some(c) = f1_color {
            b.remove(c);
        }
        let beta = b.min().ok_or_else(|| stress(SITE, "free trunk palette too small"))?;
        let pi = go!(self.beta_swap(&phi, alpha, beta));
        if self.t() >= 2 {
            go!(self.eta_membership(&pi, beta));
            return Err(stress(SITE, "free color on a long branch was not absorbed"));
        }
        self.cleaned(pi, beta)
    }

    fn cleaned(&self, pi: PartialColoring, c: Color) -> Step<(PartialColoring, Color)> {
        let ok = pi.is_missing(self.v(1), c) && self.b(&pi).contains(c) && pi.color(self.f(1)) != Some(c);
        if !ok {
            return Err(stress("trunk-clean", format!("color {c} is not free at the branch end")));
        }
        Ok(Flow::Go((pi, c)))
    }

    /// Swap the `eta`/`beta` chain at the last vertex, keeping `beta` free
    /// in the trunk; a detour through the chain may give a smaller tree.
    fn beta_swap(&mut self, phi: &PartialColoring, eta: Color, beta: Color) -> Step<PartialColoring> {
        const SITE: &str = "beta-swap";
        let g = self.eng.graph;
        let vt = self.vt();
        let long = self.t() >= 2 && self.b(phi).contains(eta);
        if long {
            go!(self.eta_membership(phi, eta));
        }
        let r = phi.component(g, vt, eta, beta)?;
        let top = self.pos(self.ur());
        let meets = r
            .vertices
            .iter()
            .any(|&v| self.tree().position(v).is_some_and(|p| p <= top));
        let pi = if meets {
            if let Some(red) = self.detour(phi, &r) {
                return Ok(Flow::Done(red));
            }
            let (ze, zb) = (self.z(phi, eta)?, self.z(phi, beta)?);
            go!(self.xchg(phi, eta, beta, Some((ze, zb)), vt))
        } else {
            go!(self.xchg(phi, eta, beta, None, vt))
        };
        if long {
            go!(self.eta_membership(&pi, beta));
            return Err(stress(SITE, "free color on a long branch was not absorbed"));
        }
        Ok(Flow::Go(pi))
    }

    /// `T(u_r)` (or `T(u_r)` minus `u_r`) followed by the part of the chain
    /// `r` from its first trunk vertex back to the last vertex.
    fn detour(&mut self, phi: &PartialColoring, r: &crate::coloring::KempeComponent) -> Option<Reduction> {
        let g = self.eng.graph;
        let ur = self.ur();
        let top = self.pos(ur);
        let (vs, es) = r.from_end(self.vt())?;
        let k = vs
            .iter()
            .position(|&v| self.tree().position(v).is_some_and(|p| p <= top))?;
        let w = vs[k];
        let mut tree = if w == ur {
            self.tree().prefix(top)
        } else {
            self.tree().prefix(top - 1)
        };
        for &e in es[..k].iter().rev() {
            tree.push(g, e).ok()?;
        }
        let mut state = self.frame.state.clone();
        state.tree = tree;
        let bound = Some(self.frame.bound);
        self.eng.try_reduced(state, phi, bound, "detour")
    }

    /// Either `eta` colors an edge of `T(v_1)` outside the final part or is a
    /// connecting color missing in the trunk tail, or a smaller tree exists.
    fn eta_membership(&mut self, phi: &PartialColoring, eta: Color) -> Step<()> {
        const SITE: &str = "eta-membership";
        let t = self.t();
        if t < 2 {
            return Ok(Flow::Go(()));
        }
        let upto = self.pos(self.v(1));
        let on_tree = self.tree().edges()[self.final_len..upto]
            .iter()
            .any(|&e| phi.color(e) == Some(eta));
        if on_tree || self.connecting_in_trunk_tail(phi, eta, false) {
            return Ok(Flow::Go(()));
        }
        go!(self.path_tail(phi));
        let i = (2..=t)
            .find(|&j| phi.color(self.f(j)) == Some(eta))
            .map_or(t - 1, |j| j - 1);
        let (vi, vt) = (self.v(i), self.vt());
        let delta = phi
            .missing(vi)
            .min()
            .ok_or_else(|| stress(SITE, "branch vertex misses no color"))?;
        let next = if !self.final_missing(phi).contains(eta) && self.connecting.contains(delta) {
            let [gamma, _] = self.pair(delta)?;
            let (zg, ze) = (self.z(phi, gamma)?, self.z(phi, eta)?);
            let pi = go!(self.xchg(phi, gamma, eta, Some((zg, ze)), vt));
            go!(self.xchg(&pi, gamma, delta, Some((zg, vi)), vt))
        } else {
            let ze = self.z(phi, eta)?;
            go!(self.xchg(phi, eta, delta, Some((ze, vi)), vt))
        };
        go!(self.branch_cut(&next, delta));
        Err(stress(SITE, "branch color did not cut the branch"))
    }

    /// When `alpha` is missing on the branch, walk it to `v_{t-1}` and drop
    /// the last edge.
    fn branch_cut(&mut self, phi: &PartialColoring, alpha: Color) -> Step<()> {
        const SITE: &str = "branch-cut";
        let g = self.eng.graph;
        let t = self.t();
        let z = self.z(phi, alpha)?;
        let Some(mut i) = (1..t).find(|&i| self.v(i) == z) else {
            return Ok(Flow::Go(()));
        };
        let vt = self.vt();
        let mut phi = phi.clone();
        let mut alpha = alpha;
        while i < t - 1 {
            let (vi, vn) = (self.v(i), self.v(i + 1));
            let beta = phi
                .missing(vn)
                .min()
                .ok_or_else(|| stress(SITE, "branch vertex misses no color"))?;
            if !self.connecting.contains(alpha) && !self.connecting.contains(beta) {
                phi = go!(self.xchg(&phi, alpha, beta, Some((vi, vn)), vt));
            } else {
                let delta = if self.connecting.contains(alpha) { alpha } else { beta };
                let gamma = self.pair_other(delta, phi.color(self.f(i + 1)))?;
                let zg = self.z(&phi, gamma)?;
                phi = go!(self.xchg(&phi, alpha, gamma, Some((zg, vi)), vt));
                phi = go!(self.xchg(&phi, gamma, beta, Some((zg, vn)), vt));
            }
            alpha = beta;
            i += 1;
        }
        let ft = self.f(t);
        let c = phi.color(ft).ok_or_else(|| stress(SITE, "branch edge uncolored"))?;
        let comp = phi.component(g, vt, alpha, c)?;
        if comp.edges != [ft] {
            return Err(stress(SITE, "last branch edge is not a chain by itself"));
        }
        let keep = self.final_tree();
        let bound = Some(self.frame.bound);
        go!(self.eng.keep_tree_paths(&self.frame.stage, self.frame.delta_n, &phi, &comp, &keep, bound));
        let mut pi = phi;
        pi.swap(g, &comp)?;
        let len = self.tree().len();
        let state = self.frame.state.prefix(len - 1);
        self.done(state, &pi, SITE)
    }

    /// Either the tree beyond the final part is not a path, or a smaller
    /// tree exists.
    fn path_tail(&mut self, phi: &PartialColoring) -> Step<()> {
        const SITE: &str = "path-tail";
        if self.tb.trunk_len > self.final_len {
            return Ok(Flow::Go(()));
        }
        let t = self.t();
        if t == 1 {
            go!(self.first_edge(phi));
            return Err(stress(SITE, "single edge beyond the final part"));
        }
        let alpha0 = self.frame.state.alpha0;
        let vt = self.vt();
        let mut phi = phi.clone();
        let mut alpha = self.pick_alpha(&phi)?;
        if !self.in_final(self.z(&phi, alpha)?) {
            go!(self.branch_cut(&phi, alpha));
            return Err(stress(SITE, "shared color sits on the branch"));
        }
        if alpha == alpha0 {
            let mut spare = self.g_missing(&phi);
            spare.remove(alpha0);
            let a2 = spare.min().ok_or_else(|| stress(SITE, "uncolored edge has one spare color"))?;
            let (z2, za) = (self.z(&phi, a2)?, self.z(&phi, alpha)?);
            phi = go!(self.xchg(&phi, a2, alpha, Some((z2, za)), vt));
            alpha = a2;
        }
        for _ in 0..2 {
            if phi.color(self.f(1)) != Some(alpha) {
                let i = (2..=t)
                    .find(|&j| phi.color(self.f(j)) == Some(alpha))
                    .map_or(t - 1, |j| j - 1);
                let vi = self.v(i);
                let beta = phi
                    .missing(vi)
                    .min()
                    .ok_or_else(|| stress(SITE, "branch vertex misses no color"))?;
                let za = self.z(&phi, alpha)?;
                let pi = go!(self.xchg(&phi, alpha, beta, Some((za, vi)), vt));
                go!(self.branch_cut(&pi, beta));
                return Err(stress(SITE, "branch color did not cut the branch"));
            }
            if self.complete_phases == 0 {
                go!(self.branch_cut(&phi, alpha));
                return Err(stress(SITE, "first branch edge carries the shared color"));
            }
            let mut spare = self.g_missing(&phi);
            spare.remove(alpha0);
            spare.remove(alpha);
            let a2 = spare.min().ok_or_else(|| stress(SITE, "uncolored edge has one spare color"))?;
            let (z2, za) = (self.z(&phi, a2)?, self.z(&phi, alpha)?);
            phi = go!(self.xchg(&phi, alpha, a2, Some((z2, za)), vt));
            alpha = a2;
        }
        Err(stress(SITE, "recoloring the first branch edge did not settle"))
    }

    /// Either the tree is more than the final part plus one edge, or a
    /// smaller tree exists.
    fn first_edge(&mut self, phi: &PartialColoring) -> Step<()> {
        const SITE: &str = "first-edge";
        let g = self.eng.graph;
        if self.tree().len() != self.final_len + 1 {
            return Ok(Flow::Go(()));
        }
        let alpha0 = self.frame.state.alpha0;
        let v1 = self.vt();
        let mut phi = phi.clone();
        let mut alpha = self.pick_alpha(&phi)?;
        let mut spare = self.g_missing(&phi);
        spare.remove(alpha0);
        if !spare.contains(alpha) {
            let a2 = spare.min().ok_or_else(|| stress(SITE, "uncolored edge has one spare color"))?;
            let (z2, za) = (self.z(&phi, a2)?, self.z(&phi, alpha)?);
            phi = go!(self.xchg(&phi, alpha, a2, Some((z2, za)), v1));
            alpha = a2;
        }
        let bound = Some(self.frame.bound);
        let final_state = self.frame.state.prefix(self.final_len);
        if self.complete_phases >= 1 {
            let gamma = phi
                .color(self.f(1))
                .ok_or_else(|| stress(SITE, "phase edge uncolored"))?;
            go!(self.eng.part_exits(&final_state, &phi, alpha, gamma, bound));
            let (za, zg) = (self.z(&phi, alpha)?, self.z(&phi, gamma)?);
            go!(self.xchg(&phi, alpha, gamma, Some((za, zg)), v1));
            return Err(stress(SITE, "phase edge chain left one exit"));
        }
        let r = phi.component(g, v1, alpha, alpha0)?;
        let keep = self.final_tree();
        go!(self.eng.keep_tree_paths(&self.frame.stage, self.frame.delta_n, &phi, &r, &keep, bound));
        Err(stress(SITE, "extending edge survived the swap"))
    }
}
