//! Reproducible random streams.
//!
//! Every stochastic routine in the crate draws from [`Xoshiro256StarStar`]
//! (Blackman & Vigna, 2018), a 256-bit xor/shift/rotate generator with a
//! 64-bit output. Seeds are expanded with SplitMix64, and independent streams
//! (Monte Carlo chains, randomized trials) are obtained from a master seed
//! with [`stream_seed`], so a run is fully determined by `(master, stream)`
//! and does not depend on how work is scheduled across threads.

use rand_core::{RngCore, SeedableRng};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `state + GOLDEN_GAMMA`.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `stream` under master seed `master`.
///
/// `stream_seed(m, i) = splitmix64(m ^ splitmix64(i))`, where `splitmix64(s)`
/// denotes the first SplitMix64 output from state `s`.
pub fn stream_seed(master: u64, stream: u64) -> u64 {
    let mut s = stream;
    let mixed = splitmix64(&mut s);
    let mut m = master ^ mixed;
    splitmix64(&mut m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn from_stream(master: u64, stream: u64) -> Self {
        Self::seed_from_u64(stream_seed(master, stream))
    }

    /// Uniform double in `[0, 1)` built from the top 53 bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fair coin from the top bit.
    #[inline]
    pub fn next_bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Uniform integer in `0..n` (Lemire's multiply-shift, negligible bias for small `n`).
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

impl RngCore for Xoshiro256StarStar {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

impl SeedableRng for Xoshiro256StarStar {
    type Seed = [u8; 32];

    fn from_seed(seed: [u8; 32]) -> Self {
        let mut s = [0u64; 4];
        for (i, word) in s.iter_mut().enumerate() {
            *word = u64::from_le_bytes(seed[8 * i..8 * i + 8].try_into().unwrap());
        }
        if s == [0; 4] {
            return Self::seed_from_u64(0);
        }
        Self { s }
    }

    fn seed_from_u64(seed: u64) -> Self {
        let mut state = seed;
        let s = [
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
        ];
        Self { s }
    }
}
