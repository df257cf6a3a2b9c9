use serde::{Deserialize, Serialize};

use super::basis::SectorBasis;
use crate::error::{Error, Result};

/// Open-boundary spin-1/2 XY chain `H = -J Σ (S^x_i S^x_{i+1} + S^y_i S^y_{i+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyChain {
    pub n: usize,
    pub j: f64,
}

impl XyChain {
    pub fn new(n: usize, j: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "N = {n} must be at least 2"
            )));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::OddN(n));
        }
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::InvalidArgument(format!("J = {j} must be positive")));
        }
        Ok(Self { n, j })
    }

    /// Matrix element between two configurations related by one
    /// antiparallel nearest-neighbour exchange.
    pub fn hopping(&self) -> f64 {
        -0.5 * self.j
    }

    /// Configurations reachable from `config` by one exchange, with the bond index.
    pub fn exchanges<'a>(&self, config: &'a [u8]) -> impl Iterator<Item = usize> + 'a {
        (0..config.len().saturating_sub(1)).filter(move |&i| config[i] != config[i + 1])
    }
}

/// Sparse sector Hamiltonian: every off-diagonal entry equals `-J/2`, so only
/// the column indices are stored.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    hopping: f64,
    row_start: Vec<usize>,
    cols: Vec<u32>,
}

impl SectorHamiltonian {
    pub fn new(chain: &XyChain, basis: &SectorBasis) -> Result<Self> {
        if chain.n != basis.n() {
            return Err(Error::DimensionMismatch(format!(
                "chain has {} sites, basis has {}",
                chain.n,
                basis.n()
            )));
        }
        let n = chain.n;
        let mut row_start = Vec::with_capacity(basis.len() + 1);
        let mut cols = Vec::new();
        row_start.push(0);
        for &s in basis.states() {
            for bond in 0..n - 1 {
                let shift = n - 2 - bond;
                let pair = (s >> shift) & 0b11;
                if pair == 0b01 || pair == 0b10 {
                    let flipped = s ^ (0b11 << shift);
                    let col = basis
                        .index_of_bits(flipped)
                        .expect("exchange preserves the sector");
                    cols.push(col as u32);
                }
            }
            row_start.push(cols.len());
        }
        Ok(Self {
            hopping: chain.hopping(),
            row_start,
            cols,
        })
    }

    pub fn dim(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for (row, o) in out.iter_mut().enumerate() {
            let acc: f64 = self.cols[self.row_start[row]..self.row_start[row + 1]]
                .iter()
                .map(|&c| v[c as usize])
                .sum();
            *o = self.hopping * acc;
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs sector dimension {}",
                v.len(),
                self.dim()
            )));
        }
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let d = self.dim();
        let mut m = nalgebra::DMatrix::zeros(d, d);
        for row in 0..d {
            for &c in &self.cols[self.row_start[row]..self.row_start[row + 1]] {
                m[(row, c as usize)] += self.hopping;
            }
        }
        m
    }
}

/// `H v` restricted to the S^z = 0 sector.
pub fn hamiltonian_apply(chain: &XyChain, basis: &SectorBasis, v: &[f64]) -> Result<Vec<f64>> {
    SectorHamiltonian::new(chain, basis)?.apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::basis::build_sector_basis;

    #[test]
    fn two_site_exchange() {
        let chain = XyChain::new(2, 1.0).unwrap();
        let basis = build_sector_basis(2).unwrap();
        let out = hamiltonian_apply(&chain, &basis, &[1.0, 0.0]).unwrap();
        assert_eq!(out, vec![0.0, -0.5]);
        let s = 0.5f64.sqrt();
        let out = hamiltonian_apply(&chain, &basis, &[s, s]).unwrap();
        assert!((out[0] + 0.5 * s).abs() < 1e-15 && (out[1] + 0.5 * s).abs() < 1e-15);
    }

    #[test]
    fn four_site_domain_wall() {
        let chain = XyChain::new(4, 1.0).unwrap();
        let basis = build_sector_basis(4).unwrap();
        let from = basis.index_of(&[0, 0, 1, 1]).unwrap();
        let to = basis.index_of(&[0, 1, 0, 1]).unwrap();
        let mut v = vec![0.0; basis.len()];
        v[from] = 1.0;
        let out = hamiltonian_apply(&chain, &basis, &v).unwrap();
        for (i, x) in out.iter().enumerate() {
            let expect = if i == to { -0.5 } else { 0.0 };
            assert_eq!(*x, expect);
        }
    }

    #[test]
    fn wrong_length_is_rejected() {
        let chain = XyChain::new(4, 1.0).unwrap();
        let basis = build_sector_basis(4).unwrap();
        assert!(matches!(
            hamiltonian_apply(&chain, &basis, &[1.0; 5]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn chain_validation() {
        assert!(matches!(XyChain::new(5, 1.0), Err(Error::OddN(5))));
        assert!(XyChain::new(4, -1.0).is_err());
        assert!(XyChain::new(0, 1.0).is_err());
    }
}
