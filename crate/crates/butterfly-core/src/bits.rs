//! Packed bit strings for messages and cached XOR content.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

/// A fixed-length string of bits, packed LSB-first into bytes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    /// All-zero string of `len` bits.
    pub fn zeros(len: usize) -> Self {
        BitString {
            bytes: vec![0u8; len.div_ceil(8)],
            len,
        }
    }

    /// Uniformly random string of `len` bits drawn from `rng`.
    pub fn random(len: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        if !len.is_multiple_of(8) {
            let mask = (1u8 << (len % 8)) - 1;
            if let Some(last) = bytes.last_mut() {
                *last &= mask;
            }
        }
        BitString { bytes, len }
    }

    /// Build from explicit bits, e.g. `BitString::from_bits(&[1, 0, 1])`.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut s = BitString::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b != 0);
        }
        s
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when the string holds no bits.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at position `i` (panics when out of range).
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.bytes[i / 8] >> (i % 8)) & 1 == 1
    }

    /// Set bit `i` to `value`.
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u8 << (i % 8);
        if value {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    /// Bitwise XOR with an equal-length string.
    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(
            self.len, other.len,
            "xor of unequal bit lengths {} and {}",
            self.len, other.len
        );
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        BitString {
            bytes,
            len: self.len,
        }
    }

    /// First `n` bits (panics when `n` exceeds the length).
    pub fn prefix(&self, n: usize) -> BitString {
        assert!(n <= self.len, "prefix {n} longer than string {}", self.len);
        let mut out = BitString::zeros(n);
        for i in 0..n {
            out.set(i, self.get(i));
        }
        out
    }

    /// Render as "0"/"1" characters, most significant position last.
    pub fn to_binary_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn xor_is_involutive() {
        let mut r = rng::stream(11, "test/bits", 0);
        let a = BitString::random(129, &mut r);
        let b = BitString::random(129, &mut r);
        assert_eq!(a.xor(&b).xor(&b), a, "xor-ing twice must restore the input");
        assert_eq!(a.xor(&a), BitString::zeros(129));
    }

    #[test]
    fn random_respects_length_mask() {
        let mut r = rng::stream(12, "test/bits", 1);
        for len in [0, 1, 7, 8, 9, 63, 64, 65] {
            let s = BitString::random(len, &mut r);
            assert_eq!(s.len(), len);
            // Walk the accessible bits; any out-of-range padding must be zero.
            let mut copy = s.clone();
            for i in 0..len {
                copy.set(i, false);
            }
            assert_eq!(copy, BitString::zeros(len), "padding bits leaked for len {len}");
        }
    }

    #[test]
    fn prefix_truncates() {
        let s = BitString::from_bits(&[1, 1, 0, 1, 0]);
        assert_eq!(s.prefix(3), BitString::from_bits(&[1, 1, 0]));
        assert_eq!(s.prefix(0).len(), 0);
        assert_eq!(s.to_binary_string(), "11010");
    }

    #[test]
    #[should_panic(expected = "unequal bit lengths")]
    fn xor_length_mismatch_panics() {
        let _ = BitString::zeros(4).xor(&BitString::zeros(5));
    }
}
