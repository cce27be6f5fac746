//! Per-node random streams.
//!
//! A stream is seeded with SHA-256 over a domain tag, the root seed
//! (little-endian) and the node id, and drives a ChaCha20 generator. Streams
//! for different node ids are independent, and inserting or removing a node
//! never changes another node's draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

const DOMAIN: &[u8] = b"sdgflow.stream.v1";

#[derive(Debug, Clone)]
pub struct RngStream {
    root_seed: u64,
    node_id: String,
    rng: ChaCha20Rng,
}

pub fn derive_stream(root_seed: u64, node_id: &str) -> RngStream {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update(root_seed.to_le_bytes());
    h.update((node_id.len() as u64).to_le_bytes());
    h.update(node_id.as_bytes());
    let seed: [u8; 32] = h.finalize().into();
    RngStream { root_seed, node_id: node_id.to_string(), rng: ChaCha20Rng::from_seed(seed) }
}

impl RngStream {
    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn node_id(&self) -> &str {
        &self.node_id
    }

    /// Independent child stream, e.g. one per permutation or sub-generator.
    /// Depends only on (root seed, node id, label), not on draws taken so far.
    pub fn substream(&self, label: &str) -> RngStream {
        derive_stream(self.root_seed, &format!("{}/{label}", self.node_id))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
