//! Deterministic, forkable random streams.
//!
//! Every random choice in the crate is a pure function of a [`StreamKey`]:
//! a 64-bit master seed plus a derivation path of integers (purpose, trial
//! index, gate index, ...). Identical keys give identical streams; distinct
//! paths give statistically independent streams. Keys are cheap to clone
//! and safe to hand to concurrent workers.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Purpose tags conventionally used as the first path element.
pub mod purpose {
    pub const GATES: u64 = 1;
    pub const SITES: u64 = 2;
    pub const OUTCOMES: u64 = 3;
    pub const LATTICE: u64 = 4;
    pub const TRIAL: u64 = 5;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamKey {
    master: u64,
    path: Vec<u64>,
}

impl StreamKey {
    pub fn new(master: u64) -> Self {
        StreamKey { master, path: Vec::new() }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Child key with one more path element.
    #[must_use]
    pub fn derive(&self, index: u64) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(index);
        StreamKey { master: self.master, path }
    }

    /// Seed bytes: SHA-256 over the master seed and the path, with an
    /// explicit length prefix so that different path shapes cannot collide.
    fn seed(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.master.to_le_bytes());
        h.update((self.path.len() as u64).to_le_bytes());
        for part in &self.path {
            h.update(part.to_le_bytes());
        }
        h.finalize().into()
    }

    /// The RNG for this key. Calling twice yields identical streams.
    pub fn rng(&self) -> ChaCha8Rng {
        use rand::SeedableRng;
        ChaCha8Rng::from_seed(self.seed())
    }
}
