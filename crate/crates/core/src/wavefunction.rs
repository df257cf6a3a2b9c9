//! Real, nonnegative wavefunctions evaluated on spin configurations.

/// A sign-free amplitude `ψ(σ) ≥ 0`.
///
/// Closures `Fn(&[u8]) -> f64` implement this directly. Models with a
/// cheaper batched evaluation override [`Amplitude::amplitudes`] and
/// [`Amplitude::log_amplitudes`].
pub trait Amplitude {
    fn amplitude(&self, config: &[u8]) -> f64;

    fn amplitudes(&self, configs: &[Vec<u8>]) -> Vec<f64> {
        configs.iter().map(|c| self.amplitude(c)).collect()
    }

    /// `ln ψ(σ)`, `-inf` for zero amplitude. Ratios are taken in log space.
    fn log_amplitudes(&self, configs: &[Vec<u8>]) -> Vec<f64> {
        self.amplitudes(configs).into_iter().map(f64::ln).collect()
    }
}

impl<F> Amplitude for F
where
    F: Fn(&[u8]) -> f64,
{
    fn amplitude(&self, config: &[u8]) -> f64 {
        self(config)
    }
}
