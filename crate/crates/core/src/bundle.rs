//! Self-contained, checksummed records of a run that can be replayed.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coloring::Color;
use crate::driver::{color_multigraph, ColoringRun, DriverConfig, DriverError, EscalationRecord};
use crate::format::{parse_graph, write_graph, FormatError};
use crate::graph::{DensityWitness, Multigraph};

pub const BUNDLE_VERSION: u32 = 1;

/// What a run ended with, in enough detail to tell two runs apart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Colored {
        /// SHA-256 of the full run record.
        digest: String,
        k_final: usize,
        colors_used: usize,
        colors: Vec<Color>,
        escalations: Vec<EscalationRecord>,
    },
    Insufficient {
        k: usize,
        witness: DensityWitness,
    },
    Unresolved {
        digest: String,
        record: EscalationRecord,
    },
    Failed {
        message: String,
    },
}

impl Outcome {
    pub fn of(result: &Result<ColoringRun, DriverError>) -> Self {
        match result {
            Ok(run) => Outcome::Colored {
                digest: sha256_hex(run.to_json().as_bytes()),
                k_final: run.k_final,
                colors_used: run.colors_used,
                colors: run.colors.clone(),
                escalations: run.escalations.clone(),
            },
            Err(DriverError::Insufficient { k, witness }) => Outcome::Insufficient {
                k: *k,
                witness: witness.clone(),
            },
            Err(DriverError::Unresolved { record, run }) => Outcome::Unresolved {
                digest: sha256_hex(run.to_json().as_bytes()),
                record: (**record).clone(),
            },
            Err(e) => Outcome::Failed { message: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Body {
    version: u32,
    graph: String,
    config: DriverConfig,
    outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub version: u32,
    /// The graph in its text format.
    pub graph: String,
    pub config: DriverConfig,
    pub outcome: Outcome,
    /// SHA-256 of the other fields.
    pub checksum: String,
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("bundle is not valid JSON")]
    Malformed(#[from] serde_json::Error),
    #[error("bundle version {found}, expected {BUNDLE_VERSION}")]
    Version { found: u64 },
    #[error("bundle checksum does not match its contents")]
    Checksum,
    #[error("bundle graph does not parse")]
    Graph(#[from] FormatError),
}

/// Result of running a bundle's recorded configuration again.
#[derive(Debug)]
pub struct Replay {
    pub graph: Multigraph,
    pub result: Result<ColoringRun, DriverError>,
    pub outcome: Outcome,
    pub matches: bool,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Bundle {
    pub fn new(graph: &Multigraph, config: &DriverConfig, result: &Result<ColoringRun, DriverError>) -> Self {
        let body = Body {
            version: BUNDLE_VERSION,
            graph: write_graph(graph),
            config: config.clone(),
            outcome: Outcome::of(result),
        };
        let checksum = body.checksum();
        Bundle {
            version: body.version,
            graph: body.graph,
            config: body.config,
            outcome: body.outcome,
            checksum,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes") + "\n"
    }

    /// Parse and check version and checksum.
    pub fn parse(text: &str) -> Result<Self, BundleError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(BUNDLE_VERSION) => {}
            found => return Err(BundleError::Version { found: found.unwrap_or(0) }),
        }
        let bundle: Bundle = serde_json::from_value(value)?;
        let body = Body {
            version: bundle.version,
            graph: bundle.graph.clone(),
            config: bundle.config.clone(),
            outcome: bundle.outcome.clone(),
        };
        if body.checksum() != bundle.checksum {
            return Err(BundleError::Checksum);
        }
        Ok(bundle)
    }

    pub fn graph(&self) -> Result<Multigraph, BundleError> {
        Ok(parse_graph(&self.graph)?)
    }

    /// Run the recorded configuration again and compare outcomes.
    pub fn replay(&self) -> Result<Replay, BundleError> {
        let graph = self.graph()?;
        let result = color_multigraph(&graph, &self.config);
        let outcome = Outcome::of(&result);
        let matches = outcome == self.outcome;
        Ok(Replay {
            graph,
            result,
            outcome,
            matches,
        })
    }
}

impl Body {
    fn checksum(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("bundle serializes").as_bytes())
    }
}
