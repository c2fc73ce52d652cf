//! Deterministic random streams keyed by `(seed, tag, index)`.
//!
//! Every random quantity in the simulator (channel coefficients, noise
//! samples, codebook symbols, message bits) is drawn from its own ChaCha8
//! stream derived from a master seed plus a textual tag and an index. Streams
//! for different keys are independent, and a stream for a given key never
//! depends on what was drawn from any other key, so sweeps can regenerate the
//! noise of slot `m` at node `X` without replaying slots `0..m`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// 64-bit FNV-1a over a byte string, used to fold tags into stream keys.
fn fnv1a(bytes: &[u8], mut state: u64) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    for &b in bytes {
        state ^= b as u64;
        state = state.wrapping_mul(PRIME);
    }
    state
}

/// SplitMix64 step, used to expand one 64-bit key into a 256-bit ChaCha seed.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// An independent ChaCha8 stream for `(seed, tag, index)`.
///
/// The tag names the consumer ("ch/S1->R2", "noise/R2", "codebook/A", ...);
/// the index distinguishes antennas, slots, or trials under one tag.
pub fn stream(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    let mut h = fnv1a(&seed.to_le_bytes(), FNV_OFFSET);
    h = fnv1a(tag.as_bytes(), h);
    h = fnv1a(&index.to_le_bytes(), h);

    let mut key = [0u8; 32];
    let mut state = h;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Collapse `(seed, tag, index)` to a derived 64-bit sub-seed.
///
/// Used where a whole child simulation (one Monte Carlo trial, one resample
/// attempt) needs its own master seed.
pub fn sub_seed(seed: u64, tag: &str, index: u64) -> u64 {
    stream(seed, tag, index).next_u64()
}

/// Uniform draw from the open interval (0, 1).
pub fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        // 53 random mantissa bits; always < 1, rejection handles the 0 case.
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u > 0.0 {
            return u;
        }
    }
}

/// Circularly symmetric complex Gaussian with unit total variance.
///
/// Real and imaginary parts are each N(0, 1/2), so `E|z|^2 = 1`.
pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> num_complex::Complex64 {
    let u = uniform_open(rng);
    let theta = 2.0 * core::f64::consts::PI * uniform_open(rng);
    let r = libm::sqrt(-libm::log(u));
    num_complex::Complex64::new(r * libm::cos(theta), r * libm::sin(theta))
}
