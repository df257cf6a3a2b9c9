//! Monte-Carlo energy estimator and sample diagnostics shared by both
//! model families.

use crate::error::{Error, Result};
use crate::exact::XyChain;
use crate::spin;
use crate::wavefunction::Amplitude;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub mean: f64,
    /// Sample standard deviation of the local energies over `√n_samples`.
    pub stderr: f64,
    pub n_samples: usize,
}

/// Configuration obtained by exchanging the spins on `bond` and `bond + 1`.
pub fn exchanged(config: &[u8], bond: usize) -> Vec<u8> {
    let mut c = config.to_vec();
    c.swap(bond, bond + 1);
    c
}

/// `E_loc(σ) = Σ_σ' H_σσ' ψ(σ')/ψ(σ)`. Only single antiparallel-bond
/// exchanges connect to `σ` and the diagonal vanishes.
pub fn local_energy<A: Amplitude + ?Sized>(psi: &A, config: &[u8], chain: &XyChain) -> Result<f64> {
    check_config(config, chain)?;
    let own = psi.amplitude(config);
    if own.is_nan() || own <= 0.0 {
        return Err(Error::ZeroAmplitudeConfig(config.to_vec()));
    }
    Ok(chain
        .exchanges(config)
        .map(|bond| chain.hopping() * psi.amplitude(&exchanged(config, bond)) / own)
        .sum())
}

fn check_config(config: &[u8], chain: &XyChain) -> Result<()> {
    if config.len() != chain.n {
        return Err(Error::DimensionMismatch(format!(
            "configuration has {} sites, chain has {}",
            config.len(),
            chain.n
        )));
    }
    Ok(())
}

/// Local energies of every sample, with amplitude ratios taken in log space
/// through one batched evaluation of all exchanged configurations.
pub fn local_energies<A: Amplitude + ?Sized>(
    psi: &A,
    samples: &[Vec<u8>],
    chain: &XyChain,
) -> Result<Vec<f64>> {
    for s in samples {
        check_config(s, chain)?;
    }
    let own = psi.log_amplitudes(samples);
    let mut neighbours = Vec::new();
    let mut owner = Vec::new();
    for (k, s) in samples.iter().enumerate() {
        if own[k] == f64::NEG_INFINITY || own[k].is_nan() {
            return Err(Error::ZeroAmplitudeConfig(s.clone()));
        }
        for bond in chain.exchanges(s) {
            neighbours.push(exchanged(s, bond));
            owner.push(k);
        }
    }
    let theirs = psi.log_amplitudes(&neighbours);
    let mut e = vec![0.0; samples.len()];
    for (k, lp) in owner.into_iter().zip(theirs) {
        e[k] += chain.hopping() * (lp - own[k]).exp();
    }
    Ok(e)
}

/// Mean and standard error of the local energy over `samples`, which the
/// caller must have drawn from `|ψ|²`.
pub fn energy_estimate<A: Amplitude + ?Sized>(
    psi: &A,
    samples: &[Vec<u8>],
    chain: &XyChain,
) -> Result<EnergyEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "no samples for the energy estimate".into(),
        ));
    }
    Ok(summarize(&local_energies(psi, samples, chain)?))
}

pub fn summarize(values: &[f64]) -> EnergyEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    EnergyEstimate {
        mean,
        stderr,
        n_samples: n,
    }
}

/// `ε = |E_model - E_exact| / N`.
pub fn energy_difference(e_model: f64, e_exact: f64, n: usize) -> f64 {
    (e_model - e_exact).abs() / n as f64
}

/// Fraction of samples with `Σσ_i ≠ N/2`.
pub fn sector_fraction(samples: &[Vec<u8>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let outside = samples.iter().filter(|s| !spin::in_zero_sector(s)).count();
    Ok(outside as f64 / samples.len() as f64)
}
