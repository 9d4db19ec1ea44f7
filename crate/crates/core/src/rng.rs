//! Counter-based random substreams.
//!
//! A [`StreamKey`] is a path of integers below a master seed. Each path maps
//! to its own ChaCha stream, so the numbers drawn for, say, trial 17 slot 42
//! are the same no matter which worker runs them or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags separating independent uses of the same trial index.
pub mod domain {
    pub const TARGET: u64 = 1;
    pub const CAMPAIGN: u64 = 2;
    pub const BENCHMARK: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
    pub const DRAW: u64 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    seed: u64,
    path: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn root(seed: u64) -> Self {
        Self { seed, path: 0 }
    }

    /// Derives the substream for `index` below this one.
    pub fn child(self, index: u64) -> Self {
        Self {
            seed: self.seed,
            path: splitmix64(self.path ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.seed;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.path);
        rng
    }
}
