use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Stream reserved for the oracle's data draw `z`.
pub const ORACLE_STREAM: u64 = 0;
/// Stream reserved for algorithm randomness `r`.
pub const ALGORITHM_STREAM: u64 = 1;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of the splitmix64 output function.
#[inline]
pub const fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A (master, stream) pair; every random draw in the crate starts from one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    pub const fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    pub const fn oracle(master: u64) -> Self {
        Self::new(master, ORACLE_STREAM)
    }

    pub const fn algorithm(master: u64) -> Self {
        Self::new(master, ALGORITHM_STREAM)
    }

    /// Master seed of replication `rep` under experiment seed `master`.
    pub const fn replication_master(master: u64, rep: u64) -> u64 {
        splitmix64(master ^ splitmix64(rep.wrapping_mul(GOLDEN_GAMMA) ^ 0xA5A5_A5A5_A5A5_A5A5))
    }

    /// Seed of `stream` within replication `rep`.
    pub const fn for_replication(master: u64, rep: u64, stream: u64) -> Self {
        Self::new(Self::replication_master(master, rep), stream)
    }

    /// Derived 64-bit value; a pure function of `(master, stream)`.
    pub const fn derive(&self) -> u64 {
        splitmix64(self.master ^ splitmix64(self.stream ^ 0x5DEE_CE66_D1CE_4E5B))
    }

    /// Child seed for a sub-stream, e.g. one agent of a federated draw.
    pub const fn child(&self, index: u64) -> Self {
        Self::new(self.derive(), index)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive())
    }
}
