//! Labeled seed derivation.
//!
//! Every random stream in the toolkit is a ChaCha8 generator seeded from a
//! 64-bit value derived from its parent seed and a label, so a stream's
//! contents depend only on its position in the derivation tree and never on
//! the order in which episodes run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent and a numeric label.
pub fn derive(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent.wrapping_add(GOLDEN)) ^ index.wrapping_mul(GOLDEN).rotate_left(17))
}

/// Derives a child seed from a parent and a string label (FNV-1a of the label).
pub fn derive_str(parent: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    derive(parent, h)
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in [0, 1) that is a pure function of its inputs.
pub fn unit_from(seed: u64) -> f64 {
    (mix64(seed) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
