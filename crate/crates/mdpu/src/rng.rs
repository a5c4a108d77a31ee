//! Counter-based deterministic random number generation.
//!
//! Every draw is a pure function of `(seed, stream, counter)`, so the three
//! kinds of randomness used by the simulator (transition sampling, discovery
//! coin flips, reveal choices) each advance their own counter and never
//! perturb one another: instrumenting or re-ordering unrelated draws cannot
//! shift a stream's sequence.

use serde::{Deserialize, Serialize};

/// Independent draw streams. Each has its own counter inside [`CounterRng`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Next-state sampling for ordinary actions.
    Transition = 0,
    /// Success/failure coin for the explore action.
    Discovery = 1,
    /// Uniform choice among undiscovered actions on a successful explore.
    Reveal = 2,
}

pub const STREAM_COUNT: usize = 3;

/// Splittable counter RNG: 64-bit output per draw via a SplitMix64-style
/// finalizer over the keyed counter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterRng {
    seed: u64,
    counters: [u64; STREAM_COUNT],
}

#[inline(always)]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline(always)]
fn draw(seed: u64, stream: u64, counter: u64) -> u64 {
    let key = mix(seed.wrapping_add(stream.wrapping_mul(0xd6e8_feb8_6659_fd93)));
    mix(key ^ counter.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            seed,
            counters: [0; STREAM_COUNT],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of draws taken so far on `stream`.
    pub fn position(&self, stream: Stream) -> u64 {
        self.counters[stream as usize]
    }

    pub fn next_u64(&mut self, stream: Stream) -> u64 {
        let c = &mut self.counters[stream as usize];
        let v = draw(self.seed, stream as u64, *c);
        *c += 1;
        v
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self, stream: Stream) -> f64 {
        (self.next_u64(stream) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// True with probability `p` (clamped to `[0, 1]`).
    pub fn bernoulli(&mut self, stream: Stream, p: f64) -> bool {
        if p <= 0.0 {
            // Consume a draw regardless so the stream position does not
            // depend on the probability value.
            self.next_f64(stream);
            return false;
        }
        self.next_f64(stream) < p
    }

    /// Uniform index in `0..n`. `n` must be nonzero.
    pub fn index(&mut self, stream: Stream, n: usize) -> usize {
        assert!(n > 0, "index() needs a nonempty range");
        // Widening multiply keeps the map unbiased to within 2^-64.
        ((self.next_u64(stream) as u128 * n as u128) >> 64) as usize
    }
}
