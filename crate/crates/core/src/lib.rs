//! Edge coloring of loopless multigraphs.
//!
//! The engine colors edges one at a time. When an edge cannot be colored
//! directly, it grows an ordered tree around the edge and applies Kempe
//! exchanges until either the edge becomes colorable or the tree proves
//! that the palette is too small.

pub mod bundle;
pub mod coloring;
pub mod driver;
pub mod exchange;
pub mod forest;
pub mod format;
pub mod graph;
pub mod oracle;
pub mod reducer;

pub use coloring::{
    greedy_partial_color, replay, ChainKind, Color, ColorSet, ColoringError, Exchange,
    KempeComponent, PartialColoring, Violation,
};
pub use bundle::{Bundle, BundleError, Outcome, Replay};
pub use format::FormatError;
pub use graph::{DensityWitness, EdgeId, GraphError, Multigraph, Vertex, VertexSet};
pub use driver::{color_multigraph, color_partial, ColoringRun, DriverConfig, DriverError, Mode};
