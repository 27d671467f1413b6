//! Seeded random streams.
//!
//! All randomness flows from ChaCha8, a counter-based generator: a master
//! seed selects the key and a 64-bit stream id selects an independent
//! substream, so trial `k` of a sweep draws the same numbers no matter which
//! worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `index` of the generator keyed by `master`.
pub fn substream(master: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Stable 64-bit hash used to derive per-task seeds.
///
/// FNV-1a over the little-endian byte encoding of each part, finished with
/// the SplitMix64 mixer. The encoding is fixed, so seeds never change between
/// releases or platforms.
#[derive(Debug, Clone)]
pub struct SeedHasher {
    state: u64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

impl Default for SeedHasher {
    fn default() -> Self {
        Self { state: FNV_OFFSET }
    }
}

impl SeedHasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(mut self, bytes: &[u8]) -> Self {
        for &b in bytes {
            self.state ^= u64::from(b);
            self.state = self.state.wrapping_mul(FNV_PRIME);
        }
        // Length-delimit so ("ab","c") and ("a","bc") differ.
        self.state ^= bytes.len() as u64;
        self.state = self.state.wrapping_mul(FNV_PRIME);
        self
    }

    pub fn u64(self, v: u64) -> Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn str(self, s: &str) -> Self {
        self.bytes(s.as_bytes())
    }

    pub fn finish(self) -> u64 {
        splitmix64(self.state)
    }
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one trial of a sweep: `hash(master, experiment, n, N, trial)`.
pub fn trial_seed(master: u64, experiment: &str, n: u64, big_n: u64, trial: u64) -> u64 {
    SeedHasher::new()
        .u64(master)
        .str(experiment)
        .u64(n)
        .u64(big_n)
        .u64(trial)
        .finish()
}
