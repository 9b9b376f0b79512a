//! Turning a non-elementary tree into either a colored edge or a strictly
//! smaller non-elementary tree.

use serde::{Deserialize, Serialize};

use crate::coloring::{Color, PartialColoring};
use crate::exchange::{stress, Engine, Frame, Reduction, Stress};
use crate::forest::{first_nonelementary, Frontier, StateSnapshot, TashkinovState};

mod base;
mod cascade;

pub use base::{base_augment, kempe_search, small_base_eliminate, SMALL_BASE, SMALL_BASE_BUDGET};

/// A failed claim together with what is needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Escalation {
    pub stress: Stress,
    pub state: Option<StateSnapshot>,
    pub colors: Vec<Color>,
}

impl Escalation {
    pub fn new(stress: Stress, state: Option<&TashkinovState>, phi: &PartialColoring) -> Self {
        Self {
            stress,
            state: state.map(TashkinovState::snapshot),
            colors: phi.assignment().to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ReductionResult {
    /// The uncolored edge is now colored.
    Colored(PartialColoring),
    /// A strictly smaller non-elementary tree.
    Shrunk(Reduction),
    Escalate(Escalation),
}

/// Reduce a tree at the phase frontier that is not elementary while every
/// proper prefix is.
pub fn reduce(eng: &mut Engine<'_>, state: &TashkinovState, phi: &PartialColoring) -> ReductionResult {
    let fail = |s: Stress| ReductionResult::Escalate(Escalation::new(s, Some(state), phi));
    if state.frontier != Frontier::Phase {
        return fail(stress("reduce", "tree is not at the phase frontier"));
    }
    if first_nonelementary(phi, &state.tree) != Some(state.tree.len()) {
        return fail(stress("reduce", "tree is not minimally non-elementary"));
    }
    let frame = Frame::new(state.clone()).expect("phase frontier");
    match cascade::run(eng, frame, phi) {
        Ok(r) => ReductionResult::Shrunk(r),
        Err(s) => fail(s),
    }
}
