//! Seed derivation. Every random decision draws from a generator seeded by
//! the run seed and the decision's coordinates, so results do not depend on
//! the order in which independent tasks happen to run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C908, |acc, p| splitmix64(acc ^ splitmix64(*p)))
}

/// Named random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Selection = 1,
    Operator = 2,
    Crossover = 3,
    Target = 4,
    Instances = 5,
    Baseline = 6,
}

pub fn task_rng(seed: u64, generation: u64, slot: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(&[seed, generation, slot, stream as u64]))
}
