//! Deterministic pseudo-random number generation.
//!
//! Every stochastic draw in this crate goes through [`Rng`], a
//! xoshiro256** generator whose 256-bit state is expanded from a 64-bit
//! seed with splitmix64. The derived samplers are fixed so that a trace
//! produced here can be reproduced bit-for-bit by any implementation
//! that follows the same conventions:
//!
//! * integers in `0..n` use Lemire's multiply-shift rejection method on
//!   the raw 64-bit output;
//! * `Bernoulli(p)` compares the raw 64-bit output against the
//!   threshold `floor(p * 2^64)`, with `p >= 1` always true.

/// splitmix64 step: returns the next output and advances the state.
///
/// Used for seed expansion and for deriving independent seeds from a
/// base seed (see the experiment harness).
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// First splitmix64 output for `seed`, without threading state.
#[inline]
pub fn splitmix64_once(seed: u64) -> u64 {
    let mut s = seed;
    splitmix64(&mut s)
}

/// xoshiro256** generator with fixed sampling conventions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Seeds the 256-bit state from four successive splitmix64 outputs.
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s }
    }

    /// Raw xoshiro256** output.
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform integer in `0..n` via Lemire rejection. `n` must be > 0.
    pub fn uniform_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "uniform_below(0)");
        let mut x = self.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128) * (n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform index in `0..len`.
    pub fn index_below(&mut self, len: usize) -> usize {
        self.uniform_below(len as u64) as usize
    }

    /// Uniform index in `0..len` excluding `skip`. Requires `len >= 2`.
    pub fn index_below_excluding(&mut self, len: usize, skip: usize) -> usize {
        debug_assert!(len >= 2 && skip < len);
        let j = self.index_below(len - 1);
        if j >= skip {
            j + 1
        } else {
            j
        }
    }

    /// Bernoulli(p) as a threshold compare on the raw output.
    ///
    /// Exactly one `next_u64` is consumed per call for every `p`, so a
    /// consumer's draw order never depends on probability values.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        let x = self.next_u64();
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        let threshold = (p * 18_446_744_073_709_551_616.0) as u64; // floor(p * 2^64)
        x < threshold
    }
}
