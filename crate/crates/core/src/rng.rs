//! Seeded random substreams.
//!
//! A run owns one 64-bit root seed. Every random decision draws from a
//! ChaCha stream addressed by `(generation, purpose, index)`, so the outcome
//! does not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Select = 2,
    Crossover = 3,
    Mutate = 4,
    Fixture = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The stream for one `(generation, purpose, index)` cell under `root`.
pub fn substream(root: u64, generation: u64, purpose: Purpose, index: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    let stream = splitmix64(splitmix64(splitmix64(generation) ^ purpose as u64) ^ index);
    rng.set_stream(stream);
    rng
}

pub fn seeded(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}
