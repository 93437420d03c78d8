//! Simulator for peer-to-peer overlays built on top of a social network.
//!
//! The crate synthesizes a friendship graph with heavy-tailed degrees, high
//! clustering and interest homophily ([`socialgraph`]), generates a
//! transit-stub router topology ([`underlay`]), places users on stub routers
//! so that geographically close friends share stub domains ([`embedding`]),
//! and then measures two things over the resulting overlay:
//!
//! * interest-query routing: flooding, highest-degree and interest-weighted
//!   forwarding, with friend lists that adapt to query replies ([`search`]);
//! * application-layer multicast delivery delay of trees built along social
//!   links versus ESM/Narada meshes and NICE hierarchies ([`multicast`]).
//!
//! [`harness`] wires everything to a seeded, reproducible experiment runner
//! and the `socnet-sim` command line tool.

pub mod embedding;
pub mod error;
pub mod harness;
pub mod multicast;
pub mod search;
pub mod socialgraph;
pub mod underlay;

pub use error::{Result, SimError};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// RNG used by every seeded operation in the crate.
pub type SimRng = ChaCha8Rng;

pub(crate) fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed for `label` from a master seed: the
/// first eight bytes (little endian) of SHA-256(master LE bytes || label).
pub fn split_seed(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
