//! Exact reference solutions for the open XY chain.
//!
//! Provides the S^z = 0 sector basis, the sector Hamiltonian, the exact
//! ground state (which doubles as the measurement distribution), and the
//! enumeration oracles used to score trained models.

mod basis;
mod dataset;
mod free_fermion;
mod hamiltonian;
mod solver;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use basis::{binomial, build_sector_basis, SectorBasis, MAX_BASIS_N};
pub use dataset::{sample_dataset, Dataset};
pub use free_fermion::free_fermion_energy;
pub use hamiltonian::{hamiltonian_apply, SectorHamiltonian, XyChain};
pub use solver::{ground_state, sector_problem, DENSE_LIMIT, MAX_GROUND_STATE_N};

use crate::error::{Error, Result};
use crate::spin;
use crate::wavefunction::Amplitude;

/// Largest chain for full-basis enumeration in [`exact_model_energy`].
pub const MAX_ENUMERATION_N: usize = 12;

/// Exact sector ground state. `amplitudes[k]` belongs to `basis.config(k)`,
/// all nonnegative and unit-normalised; `q(σ) = amplitudes²` is the data
/// distribution.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub chain: XyChain,
    pub basis: SectorBasis,
    pub amplitudes: Vec<f64>,
    pub energy: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroundStateFile {
    n: usize,
    j: f64,
    energy: f64,
    basis_order: String,
    amplitudes: Vec<f64>,
}

impl GroundState {
    pub fn n(&self) -> usize {
        self.chain.n
    }

    /// `ψ_GS(σ)`, zero outside the sector.
    pub fn amplitude_of(&self, config: &[u8]) -> f64 {
        self.basis
            .index_of(config)
            .map_or(0.0, |i| self.amplitudes[i])
    }

    /// `q(σ)`.
    pub fn probability(&self, config: &[u8]) -> f64 {
        self.amplitude_of(config).powi(2)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = GroundStateFile {
            n: self.chain.n,
            j: self.chain.j,
            energy: self.energy,
            basis_order: "lex".into(),
            amplitudes: self.amplitudes.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GroundStateFile = serde_json::from_str(text)?;
        if file.basis_order != "lex" {
            return Err(Error::Parse(format!(
                "unsupported basis_order {:?}",
                file.basis_order
            )));
        }
        let chain = XyChain::new(file.n, file.j)?;
        let basis = build_sector_basis(file.n)?;
        if basis.len() != file.amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a sector of dimension {}",
                file.amplitudes.len(),
                basis.len()
            )));
        }
        Ok(Self {
            chain,
            basis,
            amplitudes: file.amplitudes,
            energy: file.energy,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

impl Amplitude for GroundState {
    fn amplitude(&self, config: &[u8]) -> f64 {
        self.amplitude_of(config)
    }
}

/// `F = (Σ_σ ψ_GS(σ) √p(σ))²` over the sector. `model` must return `√p(σ)`.
pub fn fidelity<A: Amplitude + ?Sized>(gs: &GroundState, model: &A) -> Result<f64> {
    if gs.n() > MAX_GROUND_STATE_N {
        return Err(Error::SizeLimitExceeded {
            what: "N",
            value: gs.n(),
            limit: MAX_GROUND_STATE_N,
        });
    }
    let configs: Vec<_> = gs.basis.configs().collect();
    let model_amps = model.amplitudes(&configs);
    let overlap: f64 = gs
        .amplitudes
        .iter()
        .zip(&model_amps)
        .map(|(a, b)| a * b)
        .sum();
    Ok(overlap * overlap)
}

/// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩` by enumeration of all `2^N` configurations.
pub fn exact_model_energy<A: Amplitude + ?Sized>(chain: &XyChain, model: &A) -> Result<f64> {
    if chain.n > MAX_ENUMERATION_N {
        return Err(Error::SizeLimitExceeded {
            what: "N",
            value: chain.n,
            limit: MAX_ENUMERATION_N,
        });
    }
    let n = chain.n;
    let configs: Vec<_> = spin::all_configs(n).collect();
    let psi = model.amplitudes(&configs);
    let mut num = 0.0;
    let mut norm = 0.0;
    for (bits, c) in configs.iter().enumerate() {
        let mut h_psi = 0.0;
        for bond in chain.exchanges(c) {
            let flipped = bits ^ (0b11 << (n - 2 - bond));
            h_psi += chain.hopping() * psi[flipped];
        }
        num += psi[bits] * h_psi;
        norm += psi[bits] * psi[bits];
    }
    if norm == 0.0 {
        return Err(Error::InvalidArgument("model wavefunction vanishes".into()));
    }
    Ok(num / norm)
}
