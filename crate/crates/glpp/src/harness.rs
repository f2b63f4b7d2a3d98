//! Shared per-cell randomness. Every cell of a cylinder gets one uniform
//! drawn from a hash of (seed, x, y), so the chain, the growth field and the
//! space-time PCA can consume the same waiting times in different orders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bridges::TimedBridge;
use crate::chain::FrontChain;
use crate::measures::MeasureFamily;

/// SplitMix64 output function.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellUniforms {
    seed: u64,
}

impl CellUniforms {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in [0, 1) attached to cell (x, y).
    #[inline]
    pub fn uniform(&self, x: i64, y: i64) -> f64 {
        let h = mix(mix(self.seed ^ 0x9e37_79b9_7f4a_7c15).wrapping_add(x as u64) ^ mix((y as u64).wrapping_mul(0xd1b5_4a32_d192_ed03)));
        (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// `count` timed bridges visited by the chain started from the flat line:
/// bridge k has L = 1 + k mod l_max and is the state after a uniform number
/// of steps in [0, 200). Any state the chain reaches is a valid timed bridge.
pub fn random_timed_bridges(fam: &MeasureFamily, l_max: usize, count: usize, seed: u64) -> Vec<TimedBridge> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let mut ch = FrontChain::new(1 + k % l_max.max(1));
            let cells = CellUniforms::new(rng.gen());
            for _ in 0..rng.gen_range(0..200) {
                ch.step_coupled(fam, &cells);
            }
            ch.state()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_roughly_uniform() {
        let u = CellUniforms::new(7);
        assert_eq!(u.uniform(3, 5), u.uniform(3, 5));
        assert_ne!(u.uniform(3, 5), u.uniform(5, 3));
        assert_ne!(u.uniform(3, 5), CellUniforms::new(8).uniform(3, 5));
        let n = 100_000;
        let mut bins = [0usize; 10];
        for k in 0..n {
            let v = u.uniform(k % 317, k / 317);
            assert!((0.0..1.0).contains(&v));
            bins[(v * 10.0) as usize] += 1;
        }
        assert!(bins.iter().all(|b| (*b as f64 - 10_000.0).abs() < 500.0), "{bins:?}");
    }
}
