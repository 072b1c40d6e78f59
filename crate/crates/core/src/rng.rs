//! Platform-independent random streams.
//!
//! Every stream is a xoshiro256** generator seeded through splitmix64. The
//! seed of a stream is a pure function of the run seed and a path of stream
//! indices (event, replicate, chain, ...), so the set of random numbers a run
//! consumes does not depend on how work is scheduled across threads.

use rand_core::{RngCore, SeedableRng};
pub use rand_xoshiro::Xoshiro256StarStar as Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the sub-stream addressed by `path` under `seed`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k.wrapping_add(0x5851_f42d_4c95_7f2d))))
}

pub fn stream(seed: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, path))
}

/// Uniform double in `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// 64-bit threshold `t` such that `u < t` for uniform `u: u64` has
/// probability `p` (to 2^-64). `None` means "always" (p = 1).
pub fn threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else if p <= 0.0 {
        Some(0)
    } else {
        Some((p * 18_446_744_073_709_551_616.0) as u64)
    }
}

/// 64 independent Bernoulli bits, bit `k` set with probability
/// `P[u_k < t]` for independent uniform `u_k: u64`.
///
/// Compares the 64 virtual uniforms against `t` one binary digit at a time
/// (most significant first), drawing one random word per digit and
/// stopping as soon as every comparison is decided. Costs about eight words
/// on average instead of 64.
#[inline]
pub fn bernoulli_word(rng: &mut Rng, t: Option<u64>) -> u64 {
    let Some(t) = t else { return u64::MAX };
    if t == 0 {
        return 0;
    }
    let mut undecided = u64::MAX;
    let mut below = 0u64;
    for k in (0..64).rev() {
        let r = rng.next_u64();
        if (t >> k) & 1 == 1 {
            below |= undecided & !r;
            undecided &= r;
        } else {
            undecided &= !r;
        }
        if undecided == 0 {
            break;
        }
    }
    below
}

/// Fill `words` with Bernoulli bits, masking to `len` valid bits.
pub fn fill_bernoulli(rng: &mut Rng, p: f64, words: &mut [u64], len: usize) {
    let t = threshold(p);
    for w in words.iter_mut() {
        *w = bernoulli_word(rng, t);
    }
    let rem = len % 64;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}
