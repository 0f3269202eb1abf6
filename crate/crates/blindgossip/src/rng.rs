//! Seed derivation. Every random draw in a run descends from one `u64` seed
//! through domain-separated SHA-256 derivations, so runs replay bit-exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type ProtocolRng = ChaCha20Rng;

/// A node in the seed derivation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree {
    seed: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn digest(&self, domain: &str, index: u64) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"blindgossip/seed/v1");
        h.update(self.seed.to_be_bytes());
        h.update((domain.len() as u64).to_be_bytes());
        h.update(domain.as_bytes());
        h.update(index.to_be_bytes());
        h.finalize().into()
    }

    /// Child subtree, for handing a whole domain to a component.
    pub fn child(&self, domain: &str, index: u64) -> SeedTree {
        let d = self.digest(domain, index);
        SeedTree::new(u64::from_be_bytes(d[..8].try_into().expect("8 bytes")))
    }

    pub fn rng(&self, domain: &str, index: u64) -> ProtocolRng {
        ChaCha20Rng::from_seed(self.digest(domain, index))
    }
}
