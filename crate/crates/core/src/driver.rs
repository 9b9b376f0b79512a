//! The coloring loop: greedy start, then one uncolored edge at a time
//! through tree growth and reduction, with palette management.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{greedy_partial_color, Color, ColoringError, Exchange, PartialColoring, Violation};
use crate::exchange::{stress, Certificate, Engine, Flow, Reduction, Stress};
use crate::forest::{
    first_nonelementary, is_elementary, Connecting, Frontier, Potential, StateSnapshot,
    TashkinovState,
};
use crate::graph::{DensityWitness, EdgeId, Multigraph, Vertex, GAMMA_EXACT_CAP};
use crate::reducer::{
    base_augment, kempe_search, reduce, small_base_eliminate, Escalation, ReductionResult,
    SMALL_BASE, SMALL_BASE_BUDGET,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fail with a witness instead of enlarging the palette.
    Strict,
    /// Enlarge the palette on a witness or an unresolved diagnostic.
    #[default]
    Escalate,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Mode::Strict),
            "escalate" => Ok(Mode::Escalate),
            other => Err(format!("unknown mode {other:?}, expected strict or escalate")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Escalate => "escalate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverConfig {
    pub mode: Mode,
    pub k_override: Option<usize>,
    /// Recorded with the run. The loop itself makes no random choices.
    pub seed: u64,
    /// Keep every certificate in the run for later auditing.
    pub keep_certificates: bool,
    /// Exchange budget per uncolored edge; `None` means `10 * |V|^5`.
    pub edge_budget: Option<usize>,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Escalate,
            k_override: None,
            seed: 0,
            keep_certificates: false,
            edge_budget: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Uncolored edges taken from the queue.
    pub passes: usize,
    pub reduce_calls: usize,
    pub exchanges: usize,
    pub stages: usize,
    pub levels: usize,
    pub phases: usize,
    pub base_augments: usize,
    pub small_bases: usize,
    pub certificates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub event: String,
    pub potential: Potential,
    pub tree_size: usize,
}

/// One call of the reducer that returned a smaller tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceStep {
    pub edge: EdgeId,
    pub from: Potential,
    pub to: Potential,
    pub via: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    /// A Kempe search at the same palette colored the edge.
    KempeSearch,
    /// The edge received a new color.
    NewColor,
    /// Strict mode: the run stopped here.
    Failed,
}

/// A claim of the reduction that did not hold, and how the run went on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscalationRecord {
    pub edge: EdgeId,
    /// Index into the trace at which the claim failed.
    pub step: usize,
    pub k: usize,
    pub stress: Stress,
    pub state: Option<StateSnapshot>,
    pub colors: Vec<Color>,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringRun {
    pub mode: Mode,
    pub seed: u64,
    pub k_override: Option<usize>,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    pub k_initial: usize,
    pub k_final: usize,
    /// Greedy coloring the log starts from.
    pub initial: Vec<Color>,
    pub colors: Vec<Color>,
    pub colors_used: usize,
    pub witnesses: Vec<DensityWitness>,
    pub escalations: Vec<EscalationRecord>,
    pub stats: RunStats,
    pub reductions: Vec<ReduceStep>,
    pub trace: Vec<TraceEvent>,
    pub log: Vec<Exchange>,
    pub certificates: Vec<Certificate>,
}

impl ColoringRun {
    pub fn coloring(&self, graph: &Multigraph) -> Result<PartialColoring, Violation> {
        PartialColoring::from_assignment(graph, self.k_final, &self.colors)
    }

    pub fn initial_coloring(&self, graph: &Multigraph) -> Result<PartialColoring, Violation> {
        PartialColoring::from_assignment(graph, self.k_initial, &self.initial)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DriverError {
    #[error("{k} colors do not suffice: vertex set {:?} induces {} edges", witness.vertices, witness.induced_edges)]
    Insufficient { k: usize, witness: DensityWitness },
    #[error("{k} colors do not suffice: vertex {vertex} has degree {degree}")]
    DegreeExceedsPalette { k: usize, vertex: Vertex, degree: usize },
    #[error("strict mode needs at least max degree + 1 = {needed} colors unless a density witness refutes {k}")]
    PaletteBelowDegree { k: usize, needed: usize },
    #[error("unresolved diagnostic at edge {}: {}", record.edge, record.stress)]
    Unresolved {
        record: Box<EscalationRecord>,
        run: Box<ColoringRun>,
    },
    #[error("palette grew to {k} colors, beyond twice the max degree {delta}")]
    EnvelopeExceeded { k: usize, delta: usize },
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

/// What became of one uncolored edge.
enum EdgeOutcome {
    Colored(PartialColoring),
    Witness(DensityWitness),
    Stuck(Escalation),
}

/// Where growth from a state stopped.
enum Settled {
    /// The closure of the uncolored edge is not elementary.
    Base,
    /// A phase-frontier tree that is minimally non-elementary.
    Phase(TashkinovState),
    /// Exchanges that make a smaller tree non-elementary.
    Reduced(Reduction),
    Witness(DensityWitness),
    Stuck(Escalation),
}

struct Run<'g> {
    graph: &'g Multigraph,
    eng: Engine<'g>,
    edge_budget: usize,
    stats: RunStats,
    trace: Vec<TraceEvent>,
    reductions: Vec<ReduceStep>,
}

impl<'g> Run<'g> {
    fn event(&mut self, event: &str, state: &TashkinovState) {
        self.trace.push(TraceEvent {
            event: event.to_string(),
            potential: state.potential(),
            tree_size: state.tree.vertices().len(),
        });
    }

    fn color_edge(&mut self, phi: &PartialColoring, g: EdgeId) -> Result<EdgeOutcome, ColoringError> {
        let graph = self.graph;
        let (u, v) = graph.ends(g);
        let mut phi = phi.clone();
        let mut pending: Option<TashkinovState> = None;
        self.eng.step_budget = self.eng.exchanges.saturating_add(self.edge_budget);
        loop {
            if let Err(s) = self.eng.tick("driver") {
                return Ok(EdgeOutcome::Stuck(Escalation::new(s, pending.as_ref(), &phi)));
            }
            if phi.color(g).is_some() {
                return Ok(EdgeOutcome::Colored(phi));
            }
            if let Some(c) = phi.common_missing(u, v) {
                phi.assign(graph, g, c)?;
                return Ok(EdgeOutcome::Colored(phi));
            }
            let state = match pending.take() {
                Some(s) => s,
                None => {
                    let alpha0 = phi
                        .missing_union([u, v])
                        .min()
                        .expect("a palette above the max degree leaves a missing color");
                    let s = TashkinovState::base(graph, &phi, g, alpha0);
                    self.event("base", &s);
                    if is_elementary(&phi, &s.tree) && s.tree.vertices().len() < SMALL_BASE {
                        match s.find_connecting_color(graph, &phi) {
                            Ok(Connecting::Witness(w)) => return Ok(EdgeOutcome::Witness(w)),
                            Ok(Connecting::Color(_)) => {}
                            Err(e) => {
                                let st = stress("connecting-color", e.to_string());
                                return Ok(EdgeOutcome::Stuck(Escalation::new(st, Some(&s), &phi)));
                            }
                        }
                        self.stats.small_bases += 1;
                        match small_base_eliminate(&mut self.eng, &phi, g) {
                            Ok(Some(pi)) => {
                                phi = pi;
                                continue;
                            }
                            Ok(None) => unreachable!("base is small"),
                            Err(st) => return Ok(EdgeOutcome::Stuck(Escalation::new(st, Some(&s), &phi))),
                        }
                    }
                    s
                }
            };
            match self.settle(state, &phi) {
                Settled::Witness(w) => return Ok(EdgeOutcome::Witness(w)),
                Settled::Stuck(e) => return Ok(EdgeOutcome::Stuck(e)),
                Settled::Reduced(red) => {
                    self.event(red.via, &red.state);
                    phi = red.coloring;
                    pending = Some(red.state);
                }
                Settled::Base => {
                    self.stats.base_augments += 1;
                    match base_augment(&mut self.eng, &phi, g) {
                        Ok(pi) => phi = pi,
                        Err(st) => return Ok(EdgeOutcome::Stuck(Escalation::new(st, None, &phi))),
                    }
                }
                Settled::Phase(s) => {
                    self.stats.reduce_calls += 1;
                    self.event("reduce", &s);
                    match reduce(&mut self.eng, &s, &phi) {
                        ReductionResult::Colored(pi) => phi = pi,
                        ReductionResult::Shrunk(red) => {
                            self.reductions.push(ReduceStep {
                                edge: g,
                                from: s.potential(),
                                to: red.state.potential(),
                                via: red.via.to_string(),
                            });
                            self.event("shrunk", &red.state);
                            phi = red.coloring;
                            pending = Some(red.state);
                        }
                        ReductionResult::Escalate(e) => return Ok(EdgeOutcome::Stuck(e)),
                    }
                }
            }
        }
    }

    /// Grow `state` while it is elementary, cutting back to the smallest
    /// non-elementary prefix and restarting the next kind of part from it,
    /// until the tree is a minimally non-elementary phase tree.
    fn settle(&mut self, mut state: TashkinovState, phi: &PartialColoring) -> Settled {
        let graph = self.graph;
        loop {
            if let Err(s) = self.eng.tick("growth") {
                return Settled::Stuck(Escalation::new(s, Some(&state), phi));
            }
            let grown = match first_nonelementary(phi, &state.tree) {
                None => match state.frontier {
                    Frontier::Base | Frontier::Stage => match state.find_connecting_color(graph, phi) {
                        Ok(Connecting::Witness(w)) => return Settled::Witness(w),
                        Ok(Connecting::Color(delta)) => {
                            match self.eng.stage_exits(&state, phi, state.alpha0, delta, None) {
                                Ok(Flow::Go(())) => {}
                                Ok(Flow::Done(red)) => return Settled::Reduced(red),
                                Err(s) => return Settled::Stuck(Escalation::new(s, Some(&state), phi)),
                            }
                            self.stats.stages += 1;
                            let before = state.tree.len();
                            let r = state.grow_stage(graph, phi, delta);
                            if r.is_ok() && state.tree.len() == before {
                                Err(stress("growth", "stage added no edge"))
                            } else {
                                r.map(|_| "stage").map_err(|e| stress("growth", e.to_string()))
                            }
                        }
                        Err(e) => Err(stress("connecting-color", e.to_string())),
                    },
                    Frontier::Level => {
                        self.stats.levels += 1;
                        state
                            .next_level(graph, phi)
                            .map(|_| "level")
                            .map_err(|e| stress("growth", e.to_string()))
                    }
                    Frontier::Phase => {
                        self.stats.phases += 1;
                        state
                            .next_phase(graph, phi)
                            .map(|_| "phase")
                            .map_err(|e| stress("growth", e.to_string()))
                    }
                },
                Some(p) => {
                    let mut cut = state.prefix(p);
                    match cut.frontier {
                        Frontier::Base => return Settled::Base,
                        Frontier::Phase => return Settled::Phase(cut),
                        Frontier::Stage => {
                            self.stats.levels += 1;
                            let r = cut.start_levels(graph, phi);
                            state = cut;
                            r.map(|_| "level").map_err(|e| stress("growth", e.to_string()))
                        }
                        Frontier::Level => {
                            self.stats.phases += 1;
                            let r = cut.start_phases(graph, phi);
                            state = cut;
                            r.map(|_| "phase").map_err(|e| stress("growth", e.to_string()))
                        }
                    }
                }
            };
            match grown {
                Ok(event) => self.event(event, &state),
                Err(s) => return Settled::Stuck(Escalation::new(s, Some(&state), phi)),
            }
        }
    }
}

/// Palette refusal in strict mode below `max degree + 1`: a density witness
/// when the graph is small enough to search, or a vertex of too high degree.
fn strict_small_palette(graph: &Multigraph, k: usize) -> DriverError {
    let delta = graph.max_degree();
    if let Some(v) = (0..graph.vertex_count()).find(|&v| graph.degree(v) > k) {
        return DriverError::DegreeExceedsPalette {
            k,
            vertex: v,
            degree: graph.degree(v),
        };
    }
    if graph.vertex_count() <= GAMMA_EXACT_CAP {
        if let Ok((gamma, Some(set))) = graph.gamma_exact() {
            if gamma > k {
                if let Ok(witness) = DensityWitness::certify(graph, set.iter(), k) {
                    return DriverError::Insufficient { k, witness };
                }
            }
        }
    }
    DriverError::PaletteBelowDegree { k, needed: delta + 1 }
}

/// Color every edge of `graph`.
///
/// The palette starts at `max degree + 1`, or the override if larger. In
/// escalate mode a density witness raises the palette to the witness
/// ceiling and an unresolved diagnostic adds one color after a bounded Kempe
/// search; in strict mode both end the run with an error.
pub fn color_multigraph(graph: &Multigraph, config: &DriverConfig) -> Result<ColoringRun, DriverError> {
    let delta = graph.max_degree();
    let k_initial = match (config.mode, config.k_override) {
        (Mode::Strict, Some(k)) if k < delta + 1 => return Err(strict_small_palette(graph, k)),
        (_, Some(k)) => k.max(delta + 1),
        (_, None) => delta + 1,
    };
    let (phi, _) = greedy_partial_color(graph, k_initial);
    color_partial(graph, phi, config)
}

/// Color the remaining edges of `start`, uncolored edges in id order.
///
/// The palette of `start` must exceed the max degree. Overrides in
/// `config` are recorded but not applied.
pub fn color_partial(
    graph: &Multigraph,
    start: PartialColoring,
    config: &DriverConfig,
) -> Result<ColoringRun, DriverError> {
    let delta = graph.max_degree();
    let k_initial = start.k();
    if k_initial < delta + 1 {
        return Err(DriverError::PaletteBelowDegree {
            k: k_initial,
            needed: delta + 1,
        });
    }
    let edge_budget = config.edge_budget.unwrap_or_else(|| {
        let n = graph.vertex_count().max(2);
        n.saturating_pow(5).saturating_mul(10)
    });
    let mut phi = start.detached();
    let queue: Vec<EdgeId> = (0..graph.edge_count()).filter(|&e| phi.color(e).is_none()).collect();
    let initial = phi.assignment().to_vec();
    let mut eng = Engine::new(graph);
    eng.keep_certificates = config.keep_certificates;
    let mut run = Run {
        graph,
        eng,
        edge_budget,
        stats: RunStats::default(),
        trace: Vec::new(),
        reductions: Vec::new(),
    };
    let mut witnesses = Vec::new();
    let mut escalations = Vec::new();
    let finish = |run: Run<'_>, phi: &PartialColoring, witnesses, escalations| {
        let mut stats = run.stats;
        stats.exchanges = run.eng.exchanges;
        stats.certificates = run.eng.certificates_issued;
        ColoringRun {
            mode: config.mode,
            seed: config.seed,
            k_override: config.k_override,
            vertex_count: graph.vertex_count(),
            edge_count: graph.edge_count(),
            max_degree: delta,
            k_initial,
            k_final: phi.k(),
            initial: initial.clone(),
            colors: phi.assignment().to_vec(),
            colors_used: phi.colors_used(),
            witnesses,
            escalations,
            stats,
            reductions: run.reductions,
            trace: run.trace,
            log: phi.log().to_vec(),
            certificates: run.eng.certificates,
        }
    };

    for g in queue {
        run.stats.passes += 1;
        let (u, v) = graph.ends(g);
        loop {
            match run.color_edge(&phi, g)? {
                EdgeOutcome::Colored(pi) => {
                    phi = pi;
                    break;
                }
                EdgeOutcome::Witness(w) => {
                    if config.mode == Mode::Strict {
                        return Err(DriverError::Insufficient { k: phi.k(), witness: w });
                    }
                    let k = w.ceiling().max(phi.k() + 1);
                    if k > 2 * delta.max(1) {
                        return Err(DriverError::EnvelopeExceeded { k, delta });
                    }
                    phi.set_palette(k)?;
                    witnesses.push(w);
                }
                EdgeOutcome::Stuck(e) => {
                    let mut record = EscalationRecord {
                        edge: g,
                        step: run.trace.len(),
                        k: phi.k(),
                        stress: e.stress,
                        state: e.state,
                        colors: e.colors,
                        resolution: Resolution::KempeSearch,
                    };
                    let found = kempe_search(graph, &phi, SMALL_BASE_BUDGET, |c| {
                        c.common_missing(u, v).is_some()
                    });
                    if let Some(found) = found {
                        for op in found.log() {
                            phi.apply(graph, op)?;
                        }
                        let c = phi.common_missing(u, v).expect("search goal");
                        phi.assign(graph, g, c)?;
                        escalations.push(record);
                        break;
                    }
                    if config.mode == Mode::Strict {
                        record.resolution = Resolution::Failed;
                        let out = finish(run, &phi, witnesses, escalations);
                        return Err(DriverError::Unresolved {
                            record: Box::new(record),
                            run: Box::new(out),
                        });
                    }
                    let k = phi.k() + 1;
                    if k > 2 * delta.max(1) {
                        return Err(DriverError::EnvelopeExceeded { k, delta });
                    }
                    phi.set_palette(k)?;
                    phi.assign(graph, g, k)?;
                    record.resolution = Resolution::NewColor;
                    escalations.push(record);
                    break;
                }
            }
        }
    }
    debug_assert!(phi.is_complete());
    Ok(finish(run, &phi, witnesses, escalations))
}
