//! Reproducible random sub-streams.
//!
//! A [`SeedStream`] is a 256-bit ChaCha key derived from a 64-bit seed and a
//! path of labels. Each replica index selects one of the 2^64 independent
//! ChaCha streams under that key, so work items can be sampled in any order
//! or on any thread without changing the numbers they see.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::parallel::Execution;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
    key: [u8; 32],
    execution: Execution,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"qalg/seed");
        hasher.update(seed.to_le_bytes());
        Self {
            seed,
            key: hasher.finalize().into(),
            execution: Execution::default(),
        }
    }

    /// The user-facing seed this stream descends from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Child stream for a named run. Distinct labels give unrelated keys.
    pub fn derive(&self, label: &str) -> SeedStream {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        SeedStream {
            seed: self.seed,
            key: hasher.finalize().into(),
            execution: self.execution,
        }
    }

    /// Child stream for an indexed run (trial number, sweep point).
    pub fn derive_indexed(&self, label: &str, index: u64) -> SeedStream {
        self.derive(&format!("{label}#{index}"))
    }

    /// Generator for one replica (batch) of this stream.
    pub fn replica(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}
