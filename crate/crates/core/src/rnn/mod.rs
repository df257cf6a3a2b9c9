//! Autoregressive recurrent wavefunction `ψ(σ) = √p(σ)` with
//! `p(σ) = Π_i p(σ_i | σ_<i)`.
//!
//! The chain is read left to right. Step `i` consumes the one-hot previous
//! spin (the fixed `σ_0 = 0` at the first step) and the previous hidden
//! state, then emits the conditional for `σ_i`. In [`SymmetryMode::U1`] the
//! conditional is projected so that no sample leaves the S^z = 0 sector.

mod cell;
mod params;
mod symmetry;

use ndarray::{Array1, Array2};
use rand::Rng as _;

pub(crate) use cell::StepCache;
pub use cell::{gru_cell, output_distribution, vanilla_cell};
pub use params::{CellKind, CellWeights, GradientSet, RnnCheckpoint, RnnParameters, D_V};
pub use symmetry::{u1_project, SymmetryMode};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::spin::SpinConfig;
use crate::wavefunction::Amplitude;

/// Configurations evaluated per batched forward pass.
pub const EVAL_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState(pub Array1<f64>);

impl HiddenState {
    pub fn zeros(d_h: usize) -> Self {
        Self(Array1::zeros(d_h))
    }
}

/// `(p(σ_i = 0 | σ_<i), p(σ_i = 1 | σ_<i))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditional {
    pub p0: f64,
    pub p1: f64,
}

impl Conditional {
    pub fn prob(&self, spin: u8) -> f64 {
        if spin == 0 {
            self.p0
        } else {
            self.p1
        }
    }
}

/// Everything a teacher-forced pass computes, for backpropagation.
pub(crate) struct Trace {
    /// `hidden[i]` is `h_i`; `hidden[0]` is the zero initial state.
    pub hidden: Vec<Array2<f64>>,
    pub caches: Vec<StepCache>,
    /// Unprojected softmax outputs per step.
    pub probs: Vec<Array2<f64>>,
    /// `active[i][b]`: both spin values were still allowed at step `i`.
    pub active: Vec<Vec<bool>>,
}

pub(crate) fn check_batch<S: AsRef<[u8]>>(batch: &[S], mode: SymmetryMode) -> Result<usize> {
    let first = batch
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty batch".into()))?;
    let n = first.as_ref().len();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "configurations must have at least one site".into(),
        ));
    }
    mode.check_sites(n)?;
    for (i, c) in batch.iter().enumerate() {
        let c = c.as_ref();
        if c.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "configuration {i} has {} sites, expected {n}",
                c.len()
            )));
        }
        if c.iter().any(|&s| s > 1) {
            return Err(Error::InvalidArgument(format!(
                "configuration {i} is not binary"
            )));
        }
    }
    Ok(n)
}

/// Teacher-forced pass over a batch of equal-length configurations.
/// Returns `ln p(σ)` per configuration (`-inf` for zero probability).
pub(crate) fn forward<S: AsRef<[u8]>>(
    params: &RnnParameters,
    batch: &[S],
    mode: SymmetryMode,
    keep_trace: bool,
) -> Result<(Vec<f64>, Option<Trace>)> {
    let n = check_batch(batch, mode)?;
    let bsz = batch.len();
    let half = n / 2;
    let mut log_p = vec![0.0; bsz];
    let mut counts = vec![[0usize; 2]; bsz];
    let mut inputs = vec![0u8; bsz];
    let mut h = Array2::zeros((bsz, params.d_h()));
    let mut trace = keep_trace.then(|| Trace {
        hidden: vec![h.clone()],
        caches: Vec::with_capacity(n),
        probs: Vec::with_capacity(n),
        active: Vec::with_capacity(n),
    });

    for t in 0..n {
        let (h_next, cache) = cell::step(params, &inputs, h.view());
        let y = cell::output(params, h_next.view());
        let mut active = vec![true; bsz];
        for b in 0..bsz {
            let s = batch[b].as_ref()[t];
            let allowed = match mode {
                SymmetryMode::None => [true, true],
                SymmetryMode::U1 => symmetry::allowed(counts[b][0], counts[b][1], half),
            };
            if allowed[0] && allowed[1] {
                log_p[b] += y[[b, s as usize]].ln();
            } else {
                active[b] = false;
                if !allowed[s as usize] {
                    log_p[b] = f64::NEG_INFINITY;
                }
            }
            counts[b][s as usize] += 1;
            inputs[b] = s;
        }
        if let Some(tr) = trace.as_mut() {
            tr.hidden.push(h_next.clone());
            tr.caches.push(cache);
            tr.probs.push(y);
            tr.active.push(active);
        }
        h = h_next;
    }
    Ok((log_p, trace))
}

/// Per-site conditionals of `config` under teacher forcing, projected in
/// U(1) mode.
pub fn conditionals(
    params: &RnnParameters,
    config: &[u8],
    mode: SymmetryMode,
) -> Result<Vec<Conditional>> {
    let (_, trace) = forward(params, &[config], mode, true)?;
    let trace = trace.expect("trace requested");
    let n = config.len();
    let mut counts = [0usize; 2];
    let mut out = Vec::with_capacity(n);
    for (t, y) in trace.probs.iter().enumerate() {
        let y = Conditional {
            p0: y[[0, 0]],
            p1: y[[0, 1]],
        };
        out.push(match mode {
            SymmetryMode::None => y,
            SymmetryMode::U1 => symmetry::project(y, counts[0], counts[1], n / 2),
        });
        counts[config[t] as usize] += 1;
    }
    Ok(out)
}

/// `ln p(σ)`; `-inf` marks a configuration the model cannot produce.
pub fn log_prob(params: &RnnParameters, config: &[u8], mode: SymmetryMode) -> Result<f64> {
    Ok(forward(params, &[config], mode, false)?.0[0])
}

/// Batched [`log_prob`], evaluated in fixed chunks of [`EVAL_CHUNK`].
pub fn log_probs<S: AsRef<[u8]>>(
    params: &RnnParameters,
    configs: &[S],
    mode: SymmetryMode,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(configs.len());
    for chunk in configs.chunks(EVAL_CHUNK) {
        out.extend(forward(params, chunk, mode, false)?.0);
    }
    Ok(out)
}

/// `ψ(σ) = √p(σ)`; zero for configurations outside the model's support.
pub fn amplitude(params: &RnnParameters, config: &[u8], mode: SymmetryMode) -> Result<f64> {
    Ok((0.5 * log_prob(params, config, mode)?).exp())
}

/// Draws `n_samples` independent configurations of `n` sites by ancestral
/// sampling. Uniform variates are consumed sample-major, so the stream is
/// independent of how the work is chunked.
pub fn sample(
    params: &RnnParameters,
    n: usize,
    n_samples: usize,
    mode: SymmetryMode,
    rng: &mut Rng,
) -> Result<Vec<SpinConfig>> {
    if n == 0 || n_samples == 0 {
        return Err(Error::InvalidArgument(
            "sampling needs at least one site and one sample".into(),
        ));
    }
    mode.check_sites(n)?;
    let half = n / 2;
    let mut out = Vec::with_capacity(n_samples);
    let mut remaining = n_samples;
    while remaining > 0 {
        let bsz = remaining.min(EVAL_CHUNK);
        remaining -= bsz;
        let uniforms: Vec<f64> = (0..bsz * n).map(|_| rng.random::<f64>()).collect();
        let mut configs = vec![vec![0u8; n]; bsz];
        let mut counts = vec![[0usize; 2]; bsz];
        let mut inputs = vec![0u8; bsz];
        let mut h = Array2::zeros((bsz, params.d_h()));
        for t in 0..n {
            let (h_next, _) = cell::step(params, &inputs, h.view());
            let y = cell::output(params, h_next.view());
            for b in 0..bsz {
                let mut c = Conditional {
                    p0: y[[b, 0]],
                    p1: y[[b, 1]],
                };
                if mode == SymmetryMode::U1 {
                    c = symmetry::project(c, counts[b][0], counts[b][1], half);
                }
                let s = u8::from(uniforms[b * n + t] >= c.p0);
                configs[b][t] = s;
                counts[b][s as usize] += 1;
                inputs[b] = s;
            }
            h = h_next;
        }
        out.extend(configs);
    }
    Ok(out)
}

/// Borrowed view of a network as a wavefunction.
#[derive(Debug, Clone, Copy)]
pub struct RnnWavefunction<'a> {
    pub params: &'a RnnParameters,
    pub mode: SymmetryMode,
}

impl<'a> RnnWavefunction<'a> {
    pub fn new(params: &'a RnnParameters, mode: SymmetryMode) -> Self {
        Self { params, mode }
    }
}

impl Amplitude for RnnWavefunction<'_> {
    fn amplitude(&self, config: &[u8]) -> f64 {
        amplitude(self.params, config, self.mode).expect("valid configuration")
    }

    fn amplitudes(&self, configs: &[Vec<u8>]) -> Vec<f64> {
        self.log_amplitudes(configs)
            .into_iter()
            .map(f64::exp)
            .collect()
    }

    fn log_amplitudes(&self, configs: &[Vec<u8>]) -> Vec<f64> {
        if configs.is_empty() {
            return Vec::new();
        }
        log_probs(self.params, configs, self.mode)
            .expect("valid configurations")
            .into_iter()
            .map(|lp| 0.5 * lp)
            .collect()
    }
}
