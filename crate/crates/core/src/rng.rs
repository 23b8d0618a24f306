//! Seeded randomness.
//!
//! Every run owns one root seed. Randomness used by a behavior at a given
//! tick comes from a substream keyed by `(seed, label, index)`, so adding a
//! reporter or an extra behavior never shifts the draws another behavior sees.
//!
//! Derivations are fixed and portable:
//!
//! * `mix64` is the SplitMix64 finalizer.
//! * `run_seed(base, i) = mix64(base ^ (i + 1) * 0x9E3779B97F4A7C15)` (wrapping).
//! * `stream_seed(seed, label, index) = mix64(mix64(seed ^ fnv1a(label)) ^ mix64(index))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the engine.
pub type SimRng = ChaCha8Rng;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `run_index`-th run of a sweep.
pub fn run_seed(base_seed: u64, run_index: u64) -> u64 {
    mix64(base_seed ^ run_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01B3);
    }
    h
}

pub fn stream_seed(seed: u64, label: &str, index: u64) -> u64 {
    mix64(mix64(seed ^ fnv1a(label)) ^ mix64(index))
}

pub fn root_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn stream(seed: u64, label: &str, index: u64) -> SimRng {
    SimRng::seed_from_u64(stream_seed(seed, label, index))
}

/// `random n` semantics: uniform integer in `[0, n)` for positive `n`,
/// mirrored for negative `n`, zero otherwise. Fractional bounds truncate.
pub fn random_int<R: Rng + ?Sized>(rng: &mut R, n: f64) -> f64 {
    let bound = n.trunc();
    if bound >= 1.0 {
        rng.gen_range(0..bound as u64) as f64
    } else if bound <= -1.0 {
        -(rng.gen_range(0..(-bound) as u64) as f64)
    } else {
        0.0
    }
}

/// Uniform real in `[0, n)` (or `(n, 0]` for negative `n`).
pub fn random_float<R: Rng + ?Sized>(rng: &mut R, n: f64) -> f64 {
    rng.gen::<f64>() * n
}

/// Uniform real in `[-bound, bound]`.
pub fn symmetric<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> f64 {
    if bound == 0.0 {
        0.0
    } else {
        rng.gen_range(-bound..=bound)
    }
}
