//! Occupation-number spin configurations.
//!
//! A configuration is a slice of `u8` with `σ_i ∈ {0, 1}`; spin-up is `0`.
//! The one-hot view maps `0 → (1, 0)` and `1 → (0, 1)`.

/// Owned spin configuration.
pub type SpinConfig = Vec<u8>;

/// One-hot encoding of a single site.
pub fn one_hot(s: u8) -> [f64; 2] {
    if s == 0 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

/// Number of down spins (`σ_i = 1`).
pub fn n_down(config: &[u8]) -> usize {
    config.iter().filter(|&&s| s == 1).count()
}

/// `true` when the configuration has exactly N/2 down spins.
pub fn in_zero_sector(config: &[u8]) -> bool {
    config.len().is_multiple_of(2) && 2 * n_down(config) == config.len()
}

/// Packs a configuration into an integer with `σ_1` as the most significant bit.
pub fn to_bits(config: &[u8]) -> u64 {
    config
        .iter()
        .fold(0u64, |acc, &s| (acc << 1) | u64::from(s & 1))
}

/// Inverse of [`to_bits`] for a chain of `n` sites.
pub fn from_bits(bits: u64, n: usize) -> SpinConfig {
    (0..n).map(|i| ((bits >> (n - 1 - i)) & 1) as u8).collect()
}

/// Every configuration of `n` sites in lexicographic order.
pub fn all_configs(n: usize) -> impl Iterator<Item = SpinConfig> {
    (0..1u64 << n).map(move |b| from_bits(b, n))
}

pub fn is_binary(config: &[u8]) -> bool {
    config.iter().all(|&s| s <= 1)
}
