//! Deterministic seed derivation for per-trajectory RNG streams.
//!
//! Seeds are derived as
//! `seed_i = mix64(master .wrapping_add((i + 1) * 0x9E3779B97F4A7C15))`
//! where `mix64` is the splitmix64 finalizer. The formula is part of the
//! reproducibility contract: alternative implementations can regenerate
//! identical trajectory streams from a report's master seed.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Seed for the `index`-th trajectory of a run with the given master seed.
pub fn derive(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add((index.wrapping_add(1)).wrapping_mul(GOLDEN_GAMMA)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_and_stable() {
        let a = derive(42, 0);
        let b = derive(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, derive(42, 0));
        // Frozen values guard against accidental formula changes.
        assert_eq!(derive(0, 0), mix64(GOLDEN_GAMMA));
    }

    #[test]
    fn no_collisions_in_small_range() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000u64 {
            assert!(seen.insert(derive(123456789, i)));
        }
    }
}
