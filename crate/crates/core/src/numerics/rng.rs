//! Counter-based splittable random streams.
//!
//! A stream is a 128-bit key plus a 64-bit counter. Draw `i` is a keyed hash
//! of `i`, so a stream can be copied, advanced or split without any shared
//! state. Children are derived from the parent's key alone: the child at a
//! given index is the same no matter when, or how often, it is requested.

use rand_core::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SPLIT_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const SEED_SALT: u64 = 0x8CB9_2BA7_2F3D_8DD7;

/// SplitMix64 finalizer; a bijection on `u64`.
#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    key: [u64; 2],
    counter: u64,
}

impl RngStream {
    /// Root stream for a run seed.
    pub fn new(seed: u64) -> Self {
        let k0 = mix64(seed ^ SEED_SALT);
        let k1 = mix64(k0.wrapping_add(seed).wrapping_add(GOLDEN));
        RngStream { key: [k0, k1], counter: 0 }
    }

    pub fn from_key(key: [u64; 2]) -> Self {
        RngStream { key, counter: 0 }
    }

    pub fn key(&self) -> [u64; 2] {
        self.key
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Child stream at `index`. Depends only on this stream's key and `index`.
    pub fn substream(&self, index: u64) -> RngStream {
        let h = mix64(index.wrapping_mul(GOLDEN) ^ SPLIT_SALT);
        let k0 = mix64(self.key[0] ^ h);
        let k1 = mix64(self.key[1].wrapping_add(k0).wrapping_add(index.rotate_left(32)));
        RngStream { key: [k0, k1], counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let x = self.key[0].wrapping_add(self.counter.wrapping_mul(GOLDEN));
        self.counter = self.counter.wrapping_add(1);
        mix64(mix64(x) ^ self.key[1])
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (RngStream::next_u64(self) >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        RngStream::next_u64(self)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = RngStream::next_u64(self).to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn draws(mut s: RngStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| s.next_u64()).collect()
    }

    #[test]
    fn same_key_same_sequence() {
        let s = RngStream::new(7);
        assert_eq!(s.substream(5), s.substream(5));
        assert_eq!(draws(s.substream(5), 100), draws(s.substream(5), 100));
    }

    #[test]
    fn substream_independent_of_parent_counter() {
        let s = RngStream::new(7);
        let mut advanced = s;
        advanced.next_u64();
        advanced.next_u64();
        assert_eq!(s.substream(3), advanced.substream(3));
    }

    #[test]
    fn sibling_streams_do_not_collide() {
        let s = RngStream::new(11);
        let a = draws(s.substream(1), 1000);
        let b = draws(s.substream(2), 1000);
        let set: HashSet<_> = a.iter().collect();
        assert!(b.iter().all(|x| !set.contains(x)));
        assert!(a.iter().zip(&b).all(|(x, y)| x != y));
    }

    #[test]
    fn split_path_matters() {
        let s = RngStream::new(3);
        let ab = s.substream(1).substream(2);
        let ba = s.substream(2).substream(1);
        assert_ne!(ab, ba);
        assert_ne!(draws(ab, 10), draws(ba, 10));
    }

    #[test]
    fn many_children_have_distinct_keys() {
        let s = RngStream::new(0);
        let keys: HashSet<_> = (0..100_000u64).map(|i| s.substream(i).key()).collect();
        assert_eq!(keys.len(), 100_000);
    }

    #[test]
    fn uniform_moments() {
        let mut s = RngStream::new(99);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| s.uniform()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(xs.iter().all(|&x| (0.0..1.0).contains(&x)));
        // sd of the mean is 0.2887/1000
        assert!((mean - 0.5).abs() < 4.0 * 0.2887e-3);
        assert!((var - 1.0 / 12.0).abs() < 1e-3);
    }

    #[test]
    fn fill_bytes_matches_words() {
        let s = RngStream::new(5);
        let mut a = s;
        let mut buf = [0u8; 12];
        a.fill_bytes(&mut buf);
        let mut b = s;
        let w0 = b.next_u64().to_le_bytes();
        let w1 = b.next_u64().to_le_bytes();
        assert_eq!(&buf[..8], &w0);
        assert_eq!(&buf[8..], &w1[..4]);
    }
}
