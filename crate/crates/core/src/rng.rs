//! Counter-based stream derivation.
//!
//! Every draw in a simulation is addressed by `(master_seed, path, species,
//! step)`. The tuple is mixed into a 64-bit key that seeds an independent
//! ChaCha8 stream, so paths can be generated in any order or in parallel and
//! any single step can be replayed in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Address of one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub master_seed: u64,
    pub path_index: u64,
    pub species: u64,
    pub step: u64,
}

impl StreamId {
    pub fn new(master_seed: u64, path_index: u64, species: u64, step: u64) -> Self {
        Self {
            master_seed,
            path_index,
            species,
            step,
        }
    }

    pub fn key(&self) -> u64 {
        let mut h = splitmix(self.master_seed ^ 0x6a09_e667_f3bc_c908);
        for word in [self.path_index, self.species, self.step] {
            h = splitmix(h ^ word.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        }
        h
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key())
    }
}

// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of path `path_index` derived from a base seed, for ensembles that
/// hand each path its own master seed.
pub fn derive_seed(base: u64, path_index: u64) -> u64 {
    StreamId::new(base, path_index, u64::MAX, u64::MAX).key()
}
