//! Counter-based random streams.
//!
//! Every random draw in a run comes from a stream keyed by
//! `(seed, iteration, purpose, index)`, so phases never share generator state
//! and a loop can be checkpointed without serializing an RNG.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    InitialPolicy = 1,
    Perturb = 2,
    Estimate = 3,
    Demonstrate = 4,
    InnerOptimize = 5,
    ExpertDemo = 6,
    Instance = 7,
    Selection = 8,
    VersionSpace = 9,
    Ranking = 10,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, iteration: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut key = splitmix64(seed);
    key = splitmix64(key ^ iteration);
    key = splitmix64(key ^ purpose as u64);
    key = splitmix64(key ^ index);
    ChaCha8Rng::seed_from_u64(key)
}
