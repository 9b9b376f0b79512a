//! Ordered trees grown from an uncolored edge, and the structural checks
//! that go with them.

pub mod check;
mod state;
mod tree;

pub use state::{
    Connecting, Frontier, GrowthError, Potential, Reservation, StateSnapshot, TashkinovState,
    TrunkBranch,
};
pub use tree::{
    boundary_with, closure, closure_with_order, exit_partition, extend_with, first_nonelementary,
    is_closed, is_elementary, missing_union, plus_tree, Chain, ExitReport, OrderedTree, TreeError,
};
