use crate::error::{Error, Result};
use crate::spin::{self, SpinConfig};

/// Largest chain length for which the sector basis is enumerated.
pub const MAX_BASIS_N: usize = 24;

/// The S^z = 0 sector: all N-bit strings with exactly N/2 ones, in
/// lexicographic order with `σ_1` as the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    n: usize,
    states: Vec<u64>,
}

impl SectorBasis {
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::OddN(n));
        }
        if n > MAX_BASIS_N {
            return Err(Error::SizeLimitExceeded {
                what: "N",
                value: n,
                limit: MAX_BASIS_N,
            });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 2".into()));
        }
        let k = n / 2;
        let last = ((1u64 << k) - 1) << (n - k);
        let mut states = Vec::with_capacity(binomial(n, k));
        // Gosper's hack walks same-popcount integers in increasing order.
        let mut x: u64 = (1u64 << k) - 1;
        loop {
            states.push(x);
            if x == last {
                break;
            }
            let c = x & x.wrapping_neg();
            let r = x + c;
            x = (((r ^ x) >> 2) / c) | r;
        }
        Ok(Self { n, states })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Packed states, σ_1 as the most significant of the low `n` bits.
    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn config(&self, index: usize) -> SpinConfig {
        spin::from_bits(self.states[index], self.n)
    }

    pub fn index_of_bits(&self, bits: u64) -> Option<usize> {
        self.states.binary_search(&bits).ok()
    }

    pub fn index_of(&self, config: &[u8]) -> Option<usize> {
        if config.len() != self.n || !spin::is_binary(config) {
            return None;
        }
        self.index_of_bits(spin::to_bits(config))
    }

    pub fn configs(&self) -> impl Iterator<Item = SpinConfig> + '_ {
        self.states.iter().map(|&b| spin::from_bits(b, self.n))
    }
}

/// Enumerates the sector basis for a chain of `n` sites.
pub fn build_sector_basis(n: usize) -> Result<SectorBasis> {
    SectorBasis::new(n)
}

pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
