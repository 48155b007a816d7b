//! Deterministic stream derivation.
//!
//! Every randomized task draws from its own stream, keyed by
//! `(master_seed, tag, index)`. The key is hashed with SHA-256 into a ChaCha8
//! seed, so streams do not depend on how tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomSource {
    master_seed: u64,
}

impl RandomSource {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Stream for task `index` of the experiment step named `tag`.
    pub fn stream(&self, tag: &str, index: u64) -> Stream {
        let mut h = Sha256::new();
        h.update(self.master_seed.to_le_bytes());
        h.update((tag.len() as u64).to_le_bytes());
        h.update(tag.as_bytes());
        h.update(index.to_le_bytes());
        let digest = h.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(seed)
    }
}
