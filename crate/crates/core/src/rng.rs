//! Seeded random streams.
//!
//! Every stochastic component draws from ChaCha8 (`rand_chacha`), keyed by a
//! 64-bit seed expanded with `SeedableRng::seed_from_u64` and a 64-bit stream
//! id. Both the key expansion and the ChaCha output are platform-independent,
//! so the same `(seed, stream)` yields the same sequence everywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids, so unrelated consumers of one seed never share a sequence.
pub mod streams {
    pub const COHORT: u64 = 0x636f_686f_7274;
    pub const PILOT: u64 = 0x7069_6c6f_74;
    pub const NETWORK: u64 = 0x6e65_74;
    pub const PARTICIPANT: u64 = 0x7061_7274;
}
