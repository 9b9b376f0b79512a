//! Shared inputs for the benchmarks.

use edgecolor_core::oracle::{corpus, fixtures, gen, pendant_core, tight};
use edgecolor_core::Multigraph;

/// Named graphs of increasing difficulty for the driver.
pub fn driver_inputs() -> Vec<(String, Multigraph)> {
    let mut out = vec![
        ("petersen".to_string(), fixtures::petersen()),
        ("shannon4".to_string(), fixtures::shannon(4)),
        ("gen20".to_string(), gen(20, 1)),
        ("pendant_core9x2".to_string(), pendant_core(9, 2)),
    ];
    out.extend([0, 3].map(|s| (format!("tight{s}"), tight(s))));
    out
}

/// Small generated instances, every tenth of the corpus.
pub fn small_corpus() -> Vec<Multigraph> {
    corpus(30).into_iter().step_by(10).map(|(_, _, g)| g).collect()
}
