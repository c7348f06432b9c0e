//! Per-trial seeds.
//!
//! `seed(master, i) = mix(master ⊕ mix(i · φ))`, where `mix` is the SplitMix64
//! finalizer and `φ = 0x9E3779B97F4A7C15`. Each stage is a bijection on `u64`, so
//! distinct trial indices under one master seed always get distinct seeds. Only
//! wrapping integer arithmetic is involved, so the values are the same on every
//! platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    mix(master_seed ^ mix(trial_index.wrapping_mul(GOLDEN)))
}

pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_trial_seed(master_seed, trial_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn seeds_are_distinct_within_a_run() {
        for master in [0u64, 1, 42, u64::MAX] {
            let seeds: HashSet<u64> = (0..100_000).map(|i| derive_trial_seed(master, i)).collect();
            assert_eq!(seeds.len(), 100_000);
        }
    }

    #[test]
    fn seeds_are_pinned() {
        // Frozen values; a change here breaks reproducibility of earlier runs.
        assert_eq!(mix(0), 0);
        assert_eq!(derive_trial_seed(0, 0), 0);
        assert_eq!(derive_trial_seed(42, 7), 3_389_380_859_606_273_006);
        assert_eq!(derive_trial_seed(0, 1), 5_197_578_548_964_807_871);
        assert_eq!(
            derive_trial_seed(u64::MAX, 123_456),
            13_352_346_104_210_643_625
        );
        assert_ne!(derive_trial_seed(42, 7), derive_trial_seed(43, 7));
    }
}
