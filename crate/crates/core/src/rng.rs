//! Named random substreams derived from a single master seed.
//!
//! Every stochastic source in a run (friction draws, observation noise,
//! exploration, network initialisation, fold shuffling) owns its own stream.
//! A stream is a ChaCha8 generator keyed by `SHA-256(master_seed || label)`,
//! so streams are reproducible across platforms and toggling one source
//! never shifts the draws of another.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    label: String,
    inner: ChaCha8Rng,
}

/// Derives the stream for `(master_seed, label)`.
pub fn rng_substream(master_seed: u64, label: &str) -> RngStream {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    RngStream {
        master_seed,
        label: label.to_string(),
        inner: ChaCha8Rng::from_seed(key),
    }
}

impl RngStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// A child stream whose label is `"{self.label}/{suffix}"`. Independent of
    /// how much of the parent has been consumed.
    pub fn derive(&self, suffix: &str) -> RngStream {
        rng_substream(self.master_seed, &format!("{}/{}", self.label, suffix))
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Derives a 64-bit sub-seed, used for seeding whole runs inside a sweep.
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    let mut s = rng_substream(master_seed, label);
    s.next_u64()
}
