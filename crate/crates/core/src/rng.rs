//! Named, seedable random substreams.
//!
//! Every random quantity in the crate is drawn from a [`SeedStream`] derived
//! from one master seed by a path of names and indices, e.g.
//! `master / "rep" / 17 / "innovations"`. A stream is a pure function of its
//! path, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    key: u64,
}

impl SeedStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            key: splitmix64(master_seed ^ 0x6a09_e667_f3bc_c908),
        }
    }

    /// Child stream identified by a name.
    pub fn substream(&self, name: &str) -> Self {
        // FNV-1a over the name bytes.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in name.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        Self {
            key: splitmix64(self.key ^ h),
        }
    }

    /// Child stream identified by an index (replication, bootstrap draw, ...).
    pub fn index(&self, i: u64) -> Self {
        Self {
            key: splitmix64(self.key.wrapping_add(splitmix64(i.wrapping_add(0x9e37_79b9)))),
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut seed = [0u8; 32];
        let mut state = self.key;
        for chunk in seed.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha20Rng::from_seed(seed)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
