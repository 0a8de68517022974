//! Counter-based random streams.
//!
//! Every replicate of every experiment draws from its own stream keyed by
//! `(seed, replicate_index)`. ChaCha is a counter-mode generator, so a stream
//! is fully determined by its key and never depends on which worker thread
//! happens to consume it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 2^-53
const INV_2_53: f64 = 1.0 / 9_007_199_254_740_992.0;

#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha8Rng,
}

/// Opens the stream for replicate `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut inner = ChaCha8Rng::seed_from_u64(seed);
    inner.set_stream(index);
    Stream { inner }
}

/// Seed for a sub-experiment tagged `tag` (typically the sample size `n`),
/// so that cells of one experiment do not share streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut x = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl Stream {
    /// Uniform variate on the open interval (0, 1).
    ///
    /// The 53-bit lattice is offset by half a step so neither endpoint can be
    /// produced, which keeps every quantile function finite.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * INV_2_53
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
