//! Deterministic seed derivation.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha8Rng`] whose seed is
//! derived from a base seed and a tuple of integer coordinates (function id, bucket,
//! scheme, trial, ...). Derivation chains SplitMix64:
//!
//! ```text
//! state = splitmix64(base ^ 0x6a09e667f3bcc909)
//! for each part p: state = splitmix64(state ^ splitmix64(p ^ 0xbb67ae8584caa73b))
//! ```
//!
//! so a stream depends only on its coordinates, never on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(base ^ 0x6a09_e667_f3bc_c909), |state, &p| {
        splitmix64(state ^ splitmix64(p ^ 0xbb67_ae85_84ca_a73b))
    })
}

/// 64-bit FNV-1a, used to turn names into stable stream coordinates.
pub fn label_id(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the `index`-th substream of `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}
