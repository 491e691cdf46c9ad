//! Seeded random streams.
//!
//! Every random draw comes from ChaCha8 seeded with the user's 64-bit seed
//! through `SeedableRng::seed_from_u64`, with the ChaCha stream id chosen
//! per purpose:
//!
//! | purpose              | stream id              |
//! |----------------------|------------------------|
//! | train/test split     | `1 << 32 \| repeat`    |
//! | cross-validation     | `2 << 32 \| repeat`    |
//! | synthetic data       | `3 << 32`              |
//! | residual-curve draws | `4 << 32`              |
//!
//! Index sampling and shuffling are implemented here on top of raw `u64`
//! output, so splits depend only on the ChaCha8 keystream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SPLIT: u64 = 1 << 32;
pub const CV: u64 = 2 << 32;
pub const SYNTH: u64 = 3 << 32;
pub const CURVE: u64 = 4 << 32;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform integer in `0..n` by rejection sampling. `n` must be positive.
pub fn uniform_index(rng: &mut impl RngCore, n: usize) -> usize {
    assert!(n > 0, "uniform_index needs a non-empty range");
    let n = n as u64;
    // Largest multiple of n that fits, so every residue is equally likely.
    let zone = u64::MAX - (u64::MAX % n + 1) % n;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return (v % n) as usize;
        }
    }
}

/// Fisher-Yates shuffle, last position first.
pub fn shuffle<T>(rng: &mut impl RngCore, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}
