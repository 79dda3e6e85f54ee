//! Counter-based random numbers.
//!
//! Every draw is addressed by `(seed, i, j)` and passed through a splitmix64
//! finalizer, so entry `(i, j)` of a sampled matrix does not depend on the
//! matrix shape or on the order in which entries are generated.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output function applied to `x + GOLDEN`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with a single counter.
#[inline]
pub fn mix(seed: u64, k: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ k)
}

/// 64 random bits addressed by `(seed, i, j)`.
#[inline]
pub fn bits_at(seed: u64, i: u64, j: u64) -> u64 {
    splitmix64(mix(seed, i) ^ j.wrapping_mul(GOLDEN))
}

/// Uniform in the open interval (0, 1) built from the top 52 bits.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_unit_stays_inside() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn addressing_is_not_symmetric() {
        assert_ne!(bits_at(1, 2, 3), bits_at(1, 3, 2));
        assert_ne!(bits_at(1, 0, 0), bits_at(2, 0, 0));
    }
}
