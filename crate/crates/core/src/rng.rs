//! Seed mixing and a small deterministic generator.
//!
//! Trial `t` of a run seeded with `seed` draws from
//! `SplitMix64::new(trial_seed(seed, t))`. Both functions are fixed so other
//! implementations can reproduce the same instance streams:
//!
//! ```text
//! fmix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!           return z ^ (z >> 31)                      (wrapping u64 arithmetic)
//! trial_seed(seed, t) = fmix(seed + 0x9E3779B97F4A7C15 * (t + 1))
//! next():   state += 0x9E3779B97F4A7C15; return fmix(state)
//! below(n): draw x = next() until x < 2^64 - (2^64 mod n); return x mod n
//! ```

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// 64-bit avalanche finalizer.
pub fn fmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `t`; independent of the order in which trials run.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    fmix(seed.wrapping_add(GOLDEN.wrapping_mul(t.wrapping_add(1))))
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        fmix(self.state)
    }

    /// Uniform on `[0, n)` by rejection; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = (1u128 << 64) - ((1u128 << 64) % n as u128);
        loop {
            let x = self.next_u64();
            if (x as u128) < zone {
                return x % n;
            }
        }
    }

    /// Uniform on the inclusive range `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi, "empty range");
        let width = (hi as i128 - lo as i128 + 1) as u128;
        if width > u64::MAX as u128 {
            return self.next_u64() as i64;
        }
        (lo as i128 + self.below(width as u64) as i128) as i64
    }

    /// Bernoulli trial with probability `num / den`.
    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }
}
