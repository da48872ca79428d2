//! Seeded uniform and exponential streams.
//!
//! Each replicate owns a ChaCha8 stream selected by `(seed, replicate)`, and
//! spacing `k` consumes the `k`-th word of that stream. Draws therefore do
//! not depend on how replicates are scheduled across threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

pub struct ReplicateStream(ChaCha8Rng);

impl ReplicateStream {
    pub fn new(seed: u64, replicate: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replicate);
        Self(rng)
    }

    /// Uniform on `(0, 1]`, on the grid `{1, …, 2^53}·2^{-53}`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) + 1) as f64 * TWO_POW_M53
    }

    /// Standard exponential `−log U` by inversion.
    #[inline]
    pub fn std_exp(&mut self) -> f64 {
        -self.uniform().ln()
    }
}
