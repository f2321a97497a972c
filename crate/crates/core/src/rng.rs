//! Counter-based random streams for reproducible parallel Monte Carlo.
//!
//! Every stream is a pure function of `(seed, stream path, counter)`: there is
//! no shared generator state, so replications and bootstrap resamples can be
//! evaluated in any order — or on any number of threads — and still produce
//! bit-identical results. The mixer is the splitmix64 finalizer, driven in
//! counter mode with a Weyl increment.

/// Weyl constant (2^64 / phi), coprime to 2^64.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derived seed for a child stream family: mixing `path` into `seed` gives
/// an independent seed usable as the root of its own substreams.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut key = mix64(seed ^ GOLDEN);
    for (depth, part) in path.iter().enumerate() {
        key = mix64(key ^ mix64(part.wrapping_add(1).wrapping_mul(GOLDEN) ^ depth as u64));
    }
    key
}

/// A keyed counter stream of pseudo-random numbers.
#[derive(Debug, Clone)]
pub struct StreamRng {
    key: u64,
    counter: u64,
}

impl StreamRng {
    /// Stream identified by a single id under `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        Self::keyed(seed, &[stream])
    }

    /// Stream identified by a hierarchical path under `seed`, e.g.
    /// `[replication, resample]`. Distinct paths give independent streams.
    pub fn keyed(seed: u64, path: &[u64]) -> Self {
        Self {
            key: derive_seed(seed, path),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw in `[0, 1)` with 53 random mantissa bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}
