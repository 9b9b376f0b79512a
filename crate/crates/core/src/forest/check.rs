//! Re-derives every structural predicate of a [`TashkinovState`] from the
//! graph and a flat color assignment. Nothing here reuses the growth code.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::state::{Frontier, Potential, TashkinovState};
use crate::coloring::Color;
use crate::graph::{EdgeId, Multigraph, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct StructureViolation(pub String);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(StructureViolation(format!($($fmt)+)));
        }
    };
}

/// Read-only view of a coloring as plain data.
pub struct Snapshot<'a> {
    graph: &'a Multigraph,
    colors: &'a [Color],
    k: usize,
}

impl<'a> Snapshot<'a> {
    pub fn new(graph: &'a Multigraph, colors: &'a [Color], k: usize) -> Self {
        Self { graph, colors, k }
    }

    pub fn color(&self, e: EdgeId) -> Option<Color> {
        match self.colors[e] {
            0 => None,
            c => Some(c),
        }
    }

    pub fn missing(&self, v: Vertex) -> BTreeSet<Color> {
        let present: BTreeSet<Color> = self
            .graph
            .incident(v)
            .iter()
            .filter_map(|&e| self.color(e))
            .collect();
        (1..=self.k).filter(|c| !present.contains(c)).collect()
    }

    pub fn missing_of(&self, vertices: &[Vertex]) -> BTreeSet<Color> {
        vertices.iter().flat_map(|&v| self.missing(v)).collect()
    }

    pub fn elementary(&self, vertices: &[Vertex]) -> bool {
        let mut seen = BTreeSet::new();
        for &v in vertices {
            for c in self.missing(v) {
                if !seen.insert(c) {
                    return false;
                }
            }
        }
        true
    }

    /// Boundary edges of a vertex set with their color.
    pub fn boundary(&self, set: &BTreeSet<Vertex>) -> Vec<(EdgeId, Option<Color>)> {
        (0..self.graph.edge_count())
            .filter(|&e| {
                let (u, v) = self.graph.ends(e);
                set.contains(&u) != set.contains(&v)
            })
            .map(|e| (e, self.color(e)))
            .collect()
    }

    /// Vertex set of the closure of `seed`, by fixpoint iteration.
    pub fn closure(&self, seed: &BTreeSet<Vertex>) -> BTreeSet<Vertex> {
        let mut set = seed.clone();
        loop {
            let missing: BTreeSet<Color> = set.iter().flat_map(|&v| self.missing(v)).collect();
            let mut grew = false;
            for (e, c) in self.boundary(&set) {
                if c.is_some_and(|c| missing.contains(&c)) {
                    let (u, v) = self.graph.ends(e);
                    set.insert(u);
                    set.insert(v);
                    grew = true;
                }
            }
            if !grew {
                return set;
            }
        }
    }

    /// Maximal `a`/`b` walks that leave `set` and come back, as
    /// (vertices, edges) from one tree end to the other, each listed once.
    pub fn tree_paths(
        &self,
        set: &BTreeSet<Vertex>,
        a: Color,
        b: Color,
    ) -> Vec<(Vec<Vertex>, Vec<EdgeId>)> {
        let mut out: Vec<(Vec<Vertex>, Vec<EdgeId>)> = Vec::new();
        for (e, c) in self.boundary(set) {
            let Some(c) = c else { continue };
            if c != a && c != b {
                continue;
            }
            let (x, y) = self.graph.ends(e);
            let start = if set.contains(&x) { x } else { y };
            let mut vs = vec![start];
            let mut es = vec![e];
            let mut cur = self.graph.other(e, start);
            let mut want = if c == a { b } else { a };
            vs.push(cur);
            let mut back = false;
            loop {
                if set.contains(&cur) {
                    back = true;
                    break;
                }
                let next = self
                    .graph
                    .incident(cur)
                    .iter()
                    .copied()
                    .find(|&f| self.color(f) == Some(want));
                match next {
                    None => break,
                    Some(f) => {
                        cur = self.graph.other(f, cur);
                        es.push(f);
                        vs.push(cur);
                        want = if want == a { b } else { a };
                    }
                }
            }
            if !back {
                continue;
            }
            let mut sorted = es.clone();
            sorted.sort_unstable();
            if out.iter().any(|(_, other)| {
                let mut o = other.clone();
                o.sort_unstable();
                o == sorted
            }) {
                continue;
            }
            out.push((vs, es));
        }
        out
    }
}

struct Replay<'a> {
    graph: &'a Multigraph,
    order: Vec<Vertex>,
}

impl Replay<'_> {
    fn set(&self, upto: usize) -> BTreeSet<Vertex> {
        self.order[..upto + 1].iter().copied().collect()
    }

    fn verts(&self, upto: usize) -> &[Vertex] {
        &self.order[..upto + 1]
    }

    fn added(&self, i: usize) -> Vertex {
        self.order[i + 1]
    }

    fn attach(&self, edges: &[EdgeId], i: usize) -> Vertex {
        self.graph.other(edges[i], self.added(i))
    }
}

/// Validate every definition predicate of `state` under `colors`.
pub fn verify_state(
    graph: &Multigraph,
    colors: &[Color],
    k: usize,
    state: &TashkinovState,
) -> Result<(), StructureViolation> {
    let snap = Snapshot::new(graph, colors, k);
    let edges = state.tree.edges().to_vec();
    ensure!(!edges.is_empty(), "empty tree");
    ensure!(edges[0] == state.edge, "tree does not start at the uncolored edge");
    ensure!(snap.color(state.edge).is_none(), "edge {} is colored", state.edge);

    // Disjoint-set replay of the edge order.
    let mut parent: Vec<usize> = (0..graph.vertex_count()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let (u0, v0) = graph.ends(edges[0]);
    let mut order = vec![u0, v0];
    let mut inside: BTreeSet<Vertex> = [u0, v0].into_iter().collect();
    parent[u0] = v0;
    for &e in &edges[1..] {
        let (u, v) = graph.ends(e);
        ensure!(
            inside.contains(&u) != inside.contains(&v),
            "edge {e} does not attach exactly one new vertex"
        );
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        ensure!(ru != rv, "edge {e} closes a cycle");
        parent[ru] = rv;
        let fresh = if inside.contains(&u) { v } else { u };
        inside.insert(fresh);
        order.push(fresh);
    }
    ensure!(
        order == state.tree.vertices(),
        "stored vertex order disagrees with edge order"
    );
    let r = Replay { graph, order };
    let alpha0 = state.alpha0;
    ensure!(
        snap.missing_of(&[u0, v0]).contains(&alpha0),
        "base color {alpha0} is not missing at the uncolored edge"
    );

    // Marker shape.
    let p = edges.len();
    let ns = state.stage_ends.len();
    ensure!(state.connecting.len() == ns, "one connecting color per stage");
    let mut ends: Vec<usize> = state.stage_ends.clone();
    ends.extend(&state.level_ends);
    ends.extend(&state.phase_ends);
    ensure!(
        ends.windows(2).all(|w| w[0] < w[1]),
        "part ends are not increasing"
    );
    ensure!(ends.iter().all(|&e| e >= 1 && e < p), "part end out of range or tail empty");
    match state.frontier {
        Frontier::Base => ensure!(
            ns == 0 && state.level_edges.is_empty() && state.phase_edges.is_empty(),
            "base frontier with recorded parts"
        ),
        Frontier::Stage => ensure!(
            ns >= 1 && state.level_edges.is_empty() && state.phase_edges.is_empty(),
            "stage frontier shape"
        ),
        Frontier::Level => ensure!(
            ns >= 1
                && state.level_edges.len() == state.level_ends.len() + 1
                && state.phase_edges.is_empty()
                && state.reserved.is_empty(),
            "level frontier shape"
        ),
        Frontier::Phase => ensure!(
            ns >= 1
                && state.level_edges.len() == state.level_ends.len() + 1
                && state.phase_edges.len() == state.phase_ends.len()
                && state.reserved.len() == state.phase_ends.len() + 1,
            "phase frontier shape"
        ),
    }

    // Base part: a closure prefix of the uncolored edge.
    let base_end = state.stage_ends.first().copied().unwrap_or(p);
    for i in 1..base_end {
        let c = snap.color(edges[i]);
        ensure!(
            c.is_some_and(|c| snap.missing_of(r.verts(i)).contains(&c)),
            "base edge {} does not follow a missing color",
            edges[i]
        );
    }
    if ns > 0 {
        let seed: BTreeSet<Vertex> = [u0, v0].into_iter().collect();
        ensure!(
            snap.closure(&seed) == r.set(base_end),
            "complete base part is not the closure of the uncolored edge"
        );
    }

    // Stages beyond the base.
    let stage_count = if state.frontier == Frontier::Stage { ns } else { ns - ns.min(1) };
    for i in 1..=stage_count {
        let from = state.stage_ends[i - 1];
        let to = state.stage_ends.get(i).copied().unwrap_or(p);
        let complete = i < ns;
        check_stage(&snap, &r, &edges, from, to, complete, alpha0, state.connecting[i - 1])?;
    }

    if matches!(state.frontier, Frontier::Level | Frontier::Phase) {
        let tn = state.stage_ends[ns - 1];
        let delta = state.connecting[ns - 1];
        let tn_set = r.set(tn);
        let count = snap
            .boundary(&tn_set)
            .iter()
            .filter(|(_, c)| *c == Some(delta))
            .count();
        ensure!(count >= 2, "connecting color {delta} has {count} boundary edges");
        let paths = snap.tree_paths(&tn_set, alpha0, delta);
        let m = state.level_ends.len();
        let level_parts = if state.frontier == Frontier::Level { m + 1 } else { m };
        let mut from = tn;
        for j in 0..level_parts {
            let to = state.level_ends.get(j).copied().unwrap_or(p);
            let e = state.level_edges[j];
            ensure!(edges[from] == e, "level edge {e} is not the first edge of its level");
            check_level_edge(&snap, &r, &paths, from, e, delta)?;
            for i in from + 1..to {
                let c = snap.color(edges[i]);
                ensure!(
                    c.is_some_and(|c| snap.missing_of(r.verts(i)).contains(&c)),
                    "level edge {} does not follow a missing color",
                    edges[i]
                );
            }
            if to < p || j < m {
                let mut seed = r.set(from);
                let (a, b) = graph.ends(e);
                seed.insert(a);
                seed.insert(b);
                ensure!(snap.closure(&seed) == r.set(to), "level {} is not a closure", j + 1);
            }
            from = to;
        }
        if state.frontier == Frontier::Phase {
            let e = state.level_edges[m];
            ensure!(edges[from] == e, "first phase does not start with the level edge");
            check_level_edge(&snap, &r, &paths, from, e, delta)?;
            check_phases(&snap, &r, &edges, state, from)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_stage(
    snap: &Snapshot<'_>,
    r: &Replay<'_>,
    edges: &[EdgeId],
    from: usize,
    to: usize,
    complete: bool,
    alpha0: Color,
    delta: Color,
) -> Result<(), StructureViolation> {
    let prev = r.set(from);
    let count = snap
        .boundary(&prev)
        .iter()
        .filter(|(_, c)| *c == Some(delta))
        .count();
    ensure!(count >= 2, "connecting color {delta} has {count} boundary edges");
    let paths = snap.tree_paths(&prev, alpha0, delta);
    let mut pending: Vec<(Vec<Vertex>, Vec<EdgeId>)> = paths.clone();
    let mut i = from;
    while i < to {
        let e = edges[i];
        let hit = pending.iter().position(|(_, es)| es[0] == e || *es.last().unwrap() == e);
        let Some(idx) = hit else { break };
        let (vs, es) = pending.remove(idx);
        let mut seq = es.clone();
        if *es.last().unwrap() == e && es[0] != e {
            seq.reverse();
        }
        let _ = vs;
        for &f in &seq[..seq.len() - 1] {
            if i >= to {
                break;
            }
            ensure!(edges[i] == f, "tree path interior added out of order at edge {}", edges[i]);
            i += 1;
        }
    }
    if i < to {
        ensure!(pending.is_empty(), "closure edges precede a tree path");
    }
    for j in i..to {
        let c = snap.color(edges[j]);
        ensure!(
            c.is_some_and(|c| snap.missing_of(r.verts(j)).contains(&c)),
            "stage edge {} does not follow a missing color",
            edges[j]
        );
    }
    if complete {
        ensure!(pending.is_empty(), "complete stage misses a tree path");
        let mut seed = prev.clone();
        for (vs, _) in &paths {
            seed.extend(vs.iter().copied());
        }
        ensure!(snap.closure(&seed) == r.set(to), "stage is not the closure of its tree paths");
    }
    Ok(())
}

fn check_level_edge(
    snap: &Snapshot<'_>,
    r: &Replay<'_>,
    paths: &[(Vec<Vertex>, Vec<EdgeId>)],
    from: usize,
    e: EdgeId,
    delta: Color,
) -> Result<(), StructureViolation> {
    let inside = r.set(from);
    ensure!(snap.color(e) == Some(delta), "extending edge {e} is not colored {delta}");
    let (a, b) = r.graph.ends(e);
    ensure!(inside.contains(&a) != inside.contains(&b), "extending edge {e} is not a boundary edge");
    let ok = paths.iter().any(|(vs, es)| {
        let fwd: Vec<(Vertex, EdgeId)> = vs.iter().copied().zip(es.iter().copied()).collect();
        let bwd: Vec<(Vertex, EdgeId)> = vs.iter().rev().copied().zip(es.iter().rev().copied()).collect();
        [fwd, bwd].iter().any(|walk| {
            for &(v, f) in walk {
                if !inside.contains(&v) {
                    return false;
                }
                if !inside.contains(&r.graph.other(f, v)) {
                    return f == e;
                }
            }
            false
        })
    });
    ensure!(ok, "edge {e} is not the first exit of a tree path of the stage");
    Ok(())
}

fn check_phases(
    snap: &Snapshot<'_>,
    r: &Replay<'_>,
    edges: &[EdgeId],
    state: &TashkinovState,
    base: usize,
) -> Result<(), StructureViolation> {
    let p = edges.len();
    let s_n: BTreeSet<Color> = state.connecting.iter().copied().collect();
    let delta_n = *state.connecting.last().unwrap();
    let (u0, v0) = (r.order[0], r.order[1]);
    let at_edge = snap.missing_of(&[u0, v0]);
    let base_missing = snap.missing_of(r.verts(base));

    let g0 = &state.reserved[0];
    let want: BTreeSet<Color> = s_n.difference(&base_missing).copied().collect();
    let keys: BTreeSet<Color> = g0.keys().copied().collect();
    ensure!(keys == want, "first reservation keys {keys:?}, expected {want:?}");
    for gamma in &state.reserved {
        let mut all = BTreeSet::new();
        for pair in gamma.values() {
            ensure!(pair[0] != pair[1], "reserved pair repeats a color");
            for c in pair {
                ensure!(all.insert(*c), "reserved pairs overlap at {c}");
                ensure!(!at_edge.contains(c), "reserved color {c} is missing at the uncolored edge");
            }
        }
    }
    for pair in g0.values() {
        for c in pair {
            ensure!(base_missing.contains(c), "reserved color {c} is not missing in the phase base");
        }
    }

    let q = state.phase_ends.len();
    let mut from = base;
    for h in 0..=q {
        let to = state.phase_ends.get(h).copied().unwrap_or(p);
        let gamma = &state.reserved[h];
        if h >= 1 {
            let e = state.phase_edges[h - 1];
            ensure!(edges[from] == e, "phase edge {e} is not first in its phase");
            let prev_gamma = &state.reserved[h - 1];
            let here = snap.missing_of(r.verts(from));
            let keys: BTreeSet<Color> = gamma.keys().copied().collect();
            let want: BTreeSet<Color> = s_n.difference(&here).copied().collect();
            ensure!(keys == want, "reservation keys {keys:?} after phase {h}, expected {want:?}");
            let changed: Vec<Color> = keys
                .iter()
                .copied()
                .filter(|d| prev_gamma.get(d) != gamma.get(d))
                .collect();
            ensure!(changed.len() == 1, "reservation rotation touches {} keys", changed.len());
            let d = changed[0];
            let old: BTreeSet<Color> = prev_gamma
                .get(&d)
                .map(|p| p.iter().copied().collect())
                .unwrap_or_default();
            let new: BTreeSet<Color> = gamma[&d].iter().copied().collect();
            let c = snap.color(e);
            ensure!(
                c.is_some_and(|c| old.contains(&c) && !new.contains(&c)),
                "phase edge {e} does not carry the rotated-out reserved color"
            );
            let added: Vec<Color> = new.difference(&old).copied().collect();
            ensure!(added.len() == 1, "rotation adds {} colors", added.len());
            let prev_from = if h == 1 { base } else { state.phase_ends[h - 2] };
            let fresh = snap.missing_of(&r.order[prev_from + 1..from + 1]);
            ensure!(
                added[0] != delta_n && fresh.contains(&added[0]),
                "rotated-in color {} is not fresh in the previous phase",
                added[0]
            );
            let inside = r.set(from);
            let (a, b) = r.graph.ends(e);
            ensure!(inside.contains(&a) != inside.contains(&b), "phase edge {e} is not a boundary edge");
        }
        for i in from + 1..to {
            let Some(c) = snap.color(edges[i]) else {
                return Err(StructureViolation(format!("phase edge {} uncolored", edges[i])));
            };
            let m = snap.missing_of(r.verts(i));
            ensure!(m.contains(&c), "phase edge {} does not follow a missing color", edges[i]);
            for (d, pair) in gamma {
                if pair.contains(&c) {
                    ensure!(
                        m.contains(d),
                        "phase edge {} uses color {c} reserved for {d} too early",
                        edges[i]
                    );
                }
            }
        }
        if h < q {
            let set = r.set(to);
            let m = snap.missing_of(r.verts(to));
            let allowed: BTreeSet<Color> = gamma
                .iter()
                .filter(|(d, _)| !m.contains(d))
                .flat_map(|(_, pair)| pair.iter().copied())
                .collect();
            for (e, c) in snap.boundary(&set) {
                if let Some(c) = c {
                    ensure!(
                        !m.contains(&c) || allowed.contains(&c),
                        "complete phase {} has boundary edge {e} with free color {c}",
                        h + 1
                    );
                }
            }
        }
        from = to;
    }
    Ok(())
}

/// Trunk and branch lengths recomputed from the raw edge order.
pub fn potential_of(graph: &Multigraph, state: &TashkinovState) -> Potential {
    let edges = state.tree.edges();
    let (u0, v0) = graph.ends(edges[0]);
    let mut order = vec![u0, v0];
    for &e in &edges[1..] {
        let (u, v) = graph.ends(e);
        order.push(if order.contains(&u) { v } else { u });
    }
    let r = Replay { graph, order };
    let p = edges.len();
    let ns = state.stage_ends.len();
    let last = |v: &Vec<usize>| v.last().copied();
    let floor = match state.frontier {
        Frontier::Base => 1,
        Frontier::Stage => state.stage_ends[ns - 1],
        Frontier::Level => last(&state.level_ends).unwrap_or(state.stage_ends[ns - 1]),
        Frontier::Phase => last(&state.phase_ends)
            .or(last(&state.level_ends))
            .unwrap_or(state.stage_ends[ns - 1]),
    };
    // Smallest j beyond the floor such that edges j.. form a hanging path.
    let mut trunk = p;
    for j in floor..p {
        let chain = (j + 1..p).all(|i| r.attach(edges, i) == r.added(i - 1));
        if chain {
            trunk = j;
            break;
        }
    }
    let (stages, levels, phases) = match state.frontier {
        Frontier::Base => (0, 0, 0),
        Frontier::Stage => (ns, 0, 0),
        Frontier::Level => (ns - 1, state.level_ends.len() + 1, 0),
        Frontier::Phase => (ns - 1, state.level_ends.len(), state.phase_ends.len() + 1),
    };
    Potential {
        stages,
        levels,
        phases,
        trunk,
        branch: p - trunk,
    }
}

/// Every vertex set of a complete part is elementary.
pub fn complete_parts_elementary(
    graph: &Multigraph,
    colors: &[Color],
    k: usize,
    state: &TashkinovState,
) -> bool {
    let snap = Snapshot::new(graph, colors, k);
    let mut ends = state.stage_ends.clone();
    ends.extend(&state.level_ends);
    ends.extend(&state.phase_ends);
    ends.iter()
        .all(|&len| snap.elementary(&state.tree.vertices()[..len + 1]))
}

/// Reservation pairs grouped by key for diagnostics.
pub fn reservation_summary(state: &TashkinovState) -> BTreeMap<Color, Vec<[Color; 2]>> {
    let mut out: BTreeMap<Color, Vec<[Color; 2]>> = BTreeMap::new();
    for gamma in &state.reserved {
        for (&d, &pair) in gamma {
            out.entry(d).or_default().push(pair);
        }
    }
    out
}
