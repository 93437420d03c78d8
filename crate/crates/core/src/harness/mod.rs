//! Configuration, seeded orchestration and the command line.
//!
//! Every stage takes its seed from [`crate::split_seed`] with a fixed label
//! (see [`seed`]), so a stage can be rerun alone and still reproduce the
//! output of a full run with the same master seed.

pub mod cli;
pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod seed;

pub use config::{ExperimentConfig, PolicySpec, SearchConfig};
pub use manifest::{RunManifest, MANIFEST_FILE};
pub use pipeline::{graph_stats, GraphStats, Runner};

use sha2::{Digest, Sha256};

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
