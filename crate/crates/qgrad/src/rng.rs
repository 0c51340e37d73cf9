//! Small deterministic pseudo-random generator (splitmix64).
//!
//! Shot sampling and benchmark initialisation need reproducible streams whose
//! output is identical across platforms and crate versions, so the generator
//! is pinned here instead of depending on an external RNG crate.

/// splitmix64 stream.  Passes BigCrush, has a 2^64 period, and is trivially
/// seedable; more than enough for measurement sampling.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Stream seeded directly with `seed`.
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent substream `index` of the stream family `seed`.
    ///
    /// Used to give every measurement task its own stream so that inserting
    /// or removing a task does not shift the randomness of its neighbours.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut root = Self::new(seed);
        let base = root.next_u64();
        Self::new(base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    /// Next raw 64-bit value.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
