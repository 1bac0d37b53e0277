//! Seeded random streams.
//!
//! Every algorithmic site draws from its own stream, derived from one 64-bit
//! seed and a stream name, so adding a draw in one place never shifts the
//! randomness seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Derives independent named streams from a root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSplitter {
    seed: u64,
}

impl SeedSplitter {
    pub fn new(seed: u64) -> Self {
        SeedSplitter { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, name: &str) -> StreamRng {
        ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ fnv1a(name.as_bytes())))
    }

    /// Splitter for trial `index` of a batch; trial seeds are `seed + index`.
    pub fn trial(&self, index: u64) -> SeedSplitter {
        SeedSplitter::new(self.seed.wrapping_add(index))
    }
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
