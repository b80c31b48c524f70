//! Counter-based random streams.
//!
//! Every draw is a pure function of `(master_seed, sample_index, campaign, counter)`, so a
//! sample can be regenerated on any worker, in any order, and yields the same bits.

use rand::RngCore;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit seed from `seed` and a tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix(mix(seed ^ GOLDEN).wrapping_add(tag.wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, sample_index: u64, campaign: u16) -> Self {
        let key = mix(derive_seed(master_seed, sample_index) ^ mix(campaign as u64 + 1));
        RngStream { key, counter: 0 }
    }

    /// The `index`-th word of the stream, independent of the cursor.
    #[inline]
    pub fn word_at(&self, index: u64) -> u64 {
        mix(self.key.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// A uniform draw from `[0, 1)` at position `index`.
    #[inline]
    pub fn uniform_at(&self, index: u64) -> f64 {
        (self.word_at(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let w = self.word_at(self.counter);
        self.counter += 1;
        w
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let w = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}
