//! Seeded random streams.
//!
//! Every stochastic choice draws from a `Xoshiro256StarStar` generator whose
//! seed is derived from a master seed, a purpose tag and an index. Distinct
//! purposes therefore never share a stream, and any one of them can be
//! replayed in isolation.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

pub type Rng = Xoshiro256StarStar;

/// Purpose tags for derived streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Maze = 1,
    Starts = 2,
    Epsilon = 3,
    Replay = 4,
    Init = 5,
    TrainMaze = 6,
    EvalMaze = 7,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a 64-bit seed for `(master, purpose, index)`.
pub fn derive_seed(master: u64, purpose: Stream, index: u64) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ (purpose as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(b ^ index.wrapping_mul(0xA076_1D64_78BD_642F))
}

pub fn stream(master: u64, purpose: Stream, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, purpose, index))
}

pub fn from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
