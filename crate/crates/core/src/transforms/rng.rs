//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(key, counter)`, so a transform can
//! address its randomness by pixel or step index and produce the same
//! output regardless of iteration order or thread count.

use rand_core::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A keyed random function `counter -> u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Key(u64);

impl Key {
    pub fn new(seed: u64) -> Self {
        Key(mix64(seed ^ GOLDEN))
    }

    /// Independent sub-key for a named purpose or index.
    pub fn derive(self, stream: u64) -> Self {
        Key(mix64(self.0 ^ mix64(stream.wrapping_add(GOLDEN))))
    }

    #[inline]
    pub fn bits(self, counter: u64) -> u64 {
        mix64(
            self.0
                .wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)),
        )
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(self, counter: u64) -> f64 {
        (self.bits(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform_in(self, counter: u64, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform(counter)
    }

    /// Integer uniform in `[lo, hi)`. Requires `lo < hi`.
    #[inline]
    pub fn int_in(self, counter: u64, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo) as u64;
        lo + ((self.bits(counter) as u128 * span as u128) >> 64) as i64
    }

    /// Standard normal via Box-Muller on draws `2n` and `2n + 1`.
    #[inline]
    pub fn normal(self, counter: u64) -> f64 {
        let c = counter.wrapping_mul(2);
        let u1 = 1.0 - self.uniform(c);
        let u2 = self.uniform(c.wrapping_add(1));
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Sequential generator rooted at `derive(stream)`, for samplers that
    /// need a variable number of draws.
    pub fn stream(self, stream: u64) -> CounterRng {
        CounterRng {
            key: self.derive(stream),
            counter: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CounterRng {
    key: Key,
    counter: u64,
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let v = self.key.bits(self.counter);
        self.counter += 1;
        v
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
