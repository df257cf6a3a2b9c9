//! Restricted Boltzmann machine baseline trained by contrastive divergence.
//!
//! Visible units are the spins, `σ_i ∈ {0, 1}`; the hidden layer is always
//! marginalised analytically through the effective energy
//! `ℰ(σ) = -σᵀb - Σ_j softplus(c_j + Σ_i W_ij σ_i)`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    fidelity, free_fermion_energy, Dataset, GroundState, XyChain, MAX_GROUND_STATE_N,
};
use crate::metrics::{MetricsRecord, TrainingSink};
use crate::observables::{energy_difference, energy_estimate, sector_fraction};
use crate::rng::{self, Rng};
use crate::spin::{self, SpinConfig};
use crate::wavefunction::Amplitude;

pub const RBM_FORMAT_VERSION: u32 = 1;
/// Enumeration limit of [`exact_partition`] on either layer.
pub const MAX_PARTITION_UNITS: usize = 12;
/// Enumeration limit of [`log_partition`] and [`exact_kl`].
pub const MAX_LOG_PARTITION_N: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct RbmParameters {
    /// `N × n_h`.
    pub w: Array2<f64>,
    /// Visible bias, length `N`.
    pub b: Array1<f64>,
    /// Hidden bias, length `n_h`.
    pub c: Array1<f64>,
}

/// Gradient of a scalar with respect to `(W, b, c)`.
pub type RbmGradient = RbmParameters;

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn binary_matrix<S: AsRef<[u8]>>(rows: &[S], width: usize, what: &str) -> Result<Array2<f64>> {
    let mut m = Array2::zeros((rows.len(), width));
    for (r, row) in rows.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != width {
            return Err(Error::DimensionMismatch(format!(
                "{what} {r} has length {}, expected {width}",
                row.len()
            )));
        }
        if !spin::is_binary(row) {
            return Err(Error::InvalidArgument(format!("{what} {r} is not binary")));
        }
        for (x, &s) in m.row_mut(r).iter_mut().zip(row) {
            *x = f64::from(s);
        }
    }
    Ok(m)
}

/// Bernoulli draws `u < p`, consuming one uniform per entry in row-major order.
fn bernoulli(p: &Array2<f64>, rng: &mut Rng) -> Array2<f64> {
    p.mapv(|p| f64::from(rng.random::<f64>() < p))
}

fn to_configs(m: &Array2<f64>) -> Vec<SpinConfig> {
    m.axis_iter(Axis(0))
        .map(|r| r.iter().map(|&x| x as u8).collect())
        .collect()
}

impl RbmParameters {
    pub fn zeros(n: usize, n_h: usize) -> Self {
        Self {
            w: Array2::zeros((n, n_h)),
            b: Array1::zeros(n),
            c: Array1::zeros(n_h),
        }
    }

    /// Weights normal with standard deviation `1/√N`, zero biases.
    pub fn init(n: usize, n_h: usize, rng: &mut Rng) -> Self {
        let normal = Normal::new(0.0, 1.0 / (n as f64).sqrt()).expect("finite deviation");
        let mut p = Self::zeros(n, n_h);
        p.w.iter_mut().for_each(|x| *x = normal.sample(rng));
        p
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn n_h(&self) -> usize {
        self.c.len()
    }

    pub fn is_finite(&self) -> bool {
        self.w
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .all(|x| x.is_finite())
    }

    fn check_visible(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {len} sites, RBM has {}",
                self.n()
            )));
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.w.dim() == other.w.dim()
    }

    /// `θ ← θ - lr·g`.
    pub fn sgd_update(&mut self, grads: &RbmGradient, lr: f64) -> Result<()> {
        if !self.same_shape(grads) {
            return Err(Error::DimensionMismatch(
                "RBM gradient shape differs".into(),
            ));
        }
        self.w.scaled_add(-lr, &grads.w);
        self.b.scaled_add(-lr, &grads.b);
        self.c.scaled_add(-lr, &grads.c);
        Ok(())
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.w
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .copied()
            .collect()
    }

    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        let (n, n_h) = self.w.dim();
        if flat.len() != n * n_h + n + n_h {
            return Err(Error::DimensionMismatch(format!(
                "{} values for an RBM with {} parameters",
                flat.len(),
                n * n_h + n + n_h
            )));
        }
        let (w, rest) = flat.split_at(n * n_h);
        let (b, c) = rest.split_at(n);
        Ok(Self {
            w: Array2::from_shape_vec((n, n_h), w.to_vec()).expect("sized"),
            b: Array1::from(b.to_vec()),
            c: Array1::from(c.to_vec()),
        })
    }

    /// Pre-activations `V W + c` for a batch of visible rows.
    fn hidden_field(&self, v: &Array2<f64>) -> Array2<f64> {
        v.dot(&self.w) + &self.c
    }

    fn visible_field(&self, h: &Array2<f64>) -> Array2<f64> {
        h.dot(&self.w.t()) + &self.b
    }

    fn energies_of(&self, v: &Array2<f64>) -> Array1<f64> {
        let field = self.hidden_field(v);
        let vb = v.dot(&self.b);
        Array1::from_iter(
            field
                .axis_iter(Axis(0))
                .zip(&vb)
                .map(|(row, vb)| -vb - row.iter().map(|&x| softplus(x)).sum::<f64>()),
        )
    }
}

/// Effective (hidden-marginalised) energy `ℰ_λ(σ)`.
pub fn effective_energy(params: &RbmParameters, config: &[u8]) -> Result<f64> {
    params.check_visible(config.len())?;
    Ok(effective_energies(params, &[config])?[0])
}

/// [`effective_energy`] over a batch.
pub fn effective_energies<S: AsRef<[u8]>>(
    params: &RbmParameters,
    configs: &[S],
) -> Result<Vec<f64>> {
    let v = binary_matrix(configs, params.n(), "configuration")?;
    Ok(params.energies_of(&v).to_vec())
}

/// `p(h_j = 1 | σ) = logistic(c_j + Σ_i W_ij σ_i)`.
pub fn hidden_probabilities(params: &RbmParameters, config: &[u8]) -> Result<Vec<f64>> {
    let v = binary_matrix(&[config], params.n(), "configuration")?;
    Ok(params.hidden_field(&v).mapv(logistic).row(0).to_vec())
}

/// `p(σ_i = 1 | h) = logistic(b_i + Σ_j W_ij h_j)`.
pub fn visible_probabilities(params: &RbmParameters, hidden: &[u8]) -> Result<Vec<f64>> {
    let h = binary_matrix(&[hidden], params.n_h(), "hidden state")?;
    Ok(params.visible_field(&h).mapv(logistic).row(0).to_vec())
}

pub fn sample_hidden(params: &RbmParameters, config: &[u8], rng: &mut Rng) -> Result<Vec<u8>> {
    let v = binary_matrix(&[config], params.n(), "configuration")?;
    let h = bernoulli(&params.hidden_field(&v).mapv(logistic), rng);
    Ok(to_configs(&h).remove(0))
}

pub fn sample_visible(params: &RbmParameters, hidden: &[u8], rng: &mut Rng) -> Result<Vec<u8>> {
    let h = binary_matrix(&[hidden], params.n_h(), "hidden state")?;
    let v = bernoulli(&params.visible_field(&h).mapv(logistic), rng);
    Ok(to_configs(&v).remove(0))
}

/// Runs `k` block-Gibbs sweeps (hidden then visible) from every seed
/// configuration and returns the final visible states.
pub fn cd_k<S: AsRef<[u8]>>(
    params: &RbmParameters,
    seeds: &[S],
    k: usize,
    rng: &mut Rng,
) -> Result<Vec<SpinConfig>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut v = binary_matrix(seeds, params.n(), "seed configuration")?;
    for _ in 0..k {
        let h = bernoulli(&params.hidden_field(&v).mapv(logistic), rng);
        v = bernoulli(&params.visible_field(&h).mapv(logistic), rng);
    }
    Ok(to_configs(&v))
}

/// `Σ_σ w(σ) ∇ℰ(σ)` with weights summing to one.
fn energy_gradient_mean(
    params: &RbmParameters,
    v: &Array2<f64>,
    weights: &Array1<f64>,
) -> RbmGradient {
    let mut ph = params.hidden_field(v).mapv(logistic);
    for (mut row, &w) in ph.axis_iter_mut(Axis(0)).zip(weights) {
        row *= w;
    }
    let vw = v.t().dot(weights);
    RbmParameters {
        w: -v.t().dot(&ph),
        b: -vw,
        c: -ph.sum_axis(Axis(0)),
    }
}

fn uniform_weights(len: usize) -> Array1<f64> {
    Array1::from_elem(len, 1.0 / len as f64)
}

/// `⟨∇ℰ⟩_data - ⟨∇ℰ⟩_Γ`, each phase averaged over its own batch.
pub fn kl_gradient<S: AsRef<[u8]>, T: AsRef<[u8]>>(
    params: &RbmParameters,
    data: &[S],
    model: &[T],
) -> Result<RbmGradient> {
    if data.is_empty() || model.is_empty() {
        return Err(Error::InvalidArgument(
            "both gradient phases need samples".into(),
        ));
    }
    let pos = binary_matrix(data, params.n(), "data sample")?;
    let neg = binary_matrix(model, params.n(), "model sample")?;
    Ok(phase_difference(
        params,
        &pos,
        &uniform_weights(data.len()),
        &neg,
        &uniform_weights(model.len()),
    ))
}

fn phase_difference(
    params: &RbmParameters,
    pos: &Array2<f64>,
    pos_w: &Array1<f64>,
    neg: &Array2<f64>,
    neg_w: &Array1<f64>,
) -> RbmGradient {
    let p = energy_gradient_mean(params, pos, pos_w);
    let n = energy_gradient_mean(params, neg, neg_w);
    RbmParameters {
        w: p.w - n.w,
        b: p.b - n.b,
        c: p.c - n.c,
    }
}

fn all_visible(n: usize) -> Array2<f64> {
    let configs: Vec<SpinConfig> = spin::all_configs(n).collect();
    binary_matrix(&configs, n, "configuration").expect("enumerated configurations are valid")
}

/// `Z_λ = Σ_σ exp(-ℰ_λ(σ))` by enumeration.
pub fn exact_partition(params: &RbmParameters) -> Result<f64> {
    for (what, value) in [
        ("visible units", params.n()),
        ("hidden units", params.n_h()),
    ] {
        if value > MAX_PARTITION_UNITS {
            return Err(Error::SizeLimitExceeded {
                what,
                value,
                limit: MAX_PARTITION_UNITS,
            });
        }
    }
    Ok(params
        .energies_of(&all_visible(params.n()))
        .iter()
        .map(|e| (-e).exp())
        .sum())
}

/// `ln Z_λ`, stable for large hidden layers.
pub fn log_partition(params: &RbmParameters) -> Result<f64> {
    check_log_partition(params.n())?;
    let e = params.energies_of(&all_visible(params.n()));
    Ok(log_sum_exp(e.iter().map(|e| -e)))
}

fn check_log_partition(n: usize) -> Result<()> {
    if n > MAX_LOG_PARTITION_N {
        return Err(Error::SizeLimitExceeded {
            what: "N",
            value: n,
            limit: MAX_LOG_PARTITION_N,
        });
    }
    Ok(())
}

fn check_gs(params: &RbmParameters, gs: &GroundState) -> Result<()> {
    if gs.n() != params.n() {
        return Err(Error::DimensionMismatch(format!(
            "ground state has N = {}, RBM has N = {}",
            gs.n(),
            params.n()
        )));
    }
    check_log_partition(params.n())
}

/// `KL(q ‖ p_λ)` with `q = |ψ_GS|²` zero outside the sector.
pub fn exact_kl(params: &RbmParameters, gs: &GroundState) -> Result<f64> {
    check_gs(params, gs)?;
    let log_z = log_partition(params)?;
    let configs: Vec<SpinConfig> = gs.basis.configs().collect();
    let energies = effective_energies(params, &configs)?;
    Ok(gs
        .amplitudes
        .iter()
        .zip(&energies)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, e)| {
            let q = a * a;
            q * (q.ln() + e + log_z)
        })
        .sum::<f64>()
        .max(0.0))
}

/// Exact `∇_λ KL(q ‖ p_λ)`: the positive phase weighted by `q` over the
/// sector, the negative phase by `p_λ` over all `2^N` configurations.
pub fn exact_kl_gradient(params: &RbmParameters, gs: &GroundState) -> Result<RbmGradient> {
    check_gs(params, gs)?;
    let configs: Vec<SpinConfig> = gs.basis.configs().collect();
    let pos = binary_matrix(&configs, params.n(), "configuration")?;
    let q = Array1::from_iter(gs.amplitudes.iter().map(|a| a * a));
    let all = all_visible(params.n());
    let log_z = log_partition(params)?;
    let p = params.energies_of(&all).mapv(|e| (-e - log_z).exp());
    Ok(phase_difference(params, &pos, &q, &all, &p))
}

/// Unnormalised amplitude `exp(-ℰ_λ(σ)/2)`.
pub fn rbm_amplitude(params: &RbmParameters, config: &[u8]) -> Result<f64> {
    Ok((-effective_energy(params, config)? / 2.0).exp())
}

/// `ψ_λ(σ) = exp(-(ℰ_λ(σ) + ln Z)/2)`; `ln Z = 0` leaves it unnormalised,
/// which is enough for amplitude ratios.
#[derive(Debug, Clone, Copy)]
pub struct RbmWavefunction<'a> {
    pub params: &'a RbmParameters,
    pub log_z: f64,
}

impl<'a> RbmWavefunction<'a> {
    pub fn unnormalized(params: &'a RbmParameters) -> Self {
        Self { params, log_z: 0.0 }
    }

    pub fn normalized(params: &'a RbmParameters) -> Result<Self> {
        Ok(Self {
            params,
            log_z: log_partition(params)?,
        })
    }
}

impl Amplitude for RbmWavefunction<'_> {
    fn amplitude(&self, config: &[u8]) -> f64 {
        self.log_amplitudes(&[config.to_vec()])[0].exp()
    }

    fn log_amplitudes(&self, configs: &[Vec<u8>]) -> Vec<f64> {
        effective_energies(self.params, configs)
            .expect("configurations sized for this RBM")
            .into_iter()
            .map(|e| -(e + self.log_z) / 2.0)
            .collect()
    }

    fn amplitudes(&self, configs: &[Vec<u8>]) -> Vec<f64> {
        self.log_amplitudes(configs)
            .into_iter()
            .map(f64::exp)
            .collect()
    }
}

/// Mean NLL of a dataset, `⟨ℰ⟩ + ln Z`.
pub fn rbm_nll(params: &RbmParameters, dataset: &Dataset) -> Result<f64> {
    let log_z = log_partition(params)?;
    let e = effective_energies(params, dataset.samples())?;
    Ok(e.iter().sum::<f64>() / e.len() as f64 + log_z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbmTrainingConfig {
    pub n_h: usize,
    pub seed: u64,
    pub base_lr: f64,
    /// Learning rate at epoch `t` (0-based) is `base_lr · lr_decay^t`.
    pub lr_decay: f64,
    pub positive_batch: usize,
    pub negative_batch: usize,
    pub gibbs_k: usize,
    pub epochs: usize,
    pub eval_every: usize,
    pub eval_samples: usize,
    pub j: f64,
    pub checkpoint_every: usize,
    pub record_time: bool,
}

impl Default for RbmTrainingConfig {
    fn default() -> Self {
        Self {
            n_h: 100,
            seed: 1234,
            base_lr: 0.01,
            lr_decay: 0.999,
            positive_batch: 100,
            negative_batch: 200,
            gibbs_k: 100,
            epochs: 2000,
            eval_every: 10,
            eval_samples: 10_000,
            j: 1.0,
            checkpoint_every: crate::training::DEFAULT_CHECKPOINT_EVERY,
            record_time: false,
        }
    }
}

impl RbmTrainingConfig {
    /// Hidden-layer size and seed tabulated for chain length `n`.
    pub fn for_chain(n: usize) -> Self {
        let n_h = match n {
            0..=2 => 10,
            3..=4 => 50,
            _ => 100,
        };
        let seed = match n {
            2 => 7777,
            4 | 30 | 50 => 9999,
            6 => 2222,
            16 | 40 => 1357,
            _ => 1234,
        };
        Self {
            n_h,
            seed,
            ..Self::default()
        }
    }

    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.base_lr * self.lr_decay.powi(epoch as i32)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_h", self.n_h),
            ("positive batch", self.positive_batch),
            ("negative batch", self.negative_batch),
            ("k", self.gibbs_k),
            ("eval_every", self.eval_every),
            ("eval samples", self.eval_samples),
            ("checkpoint_every", self.checkpoint_every),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
        }
        if !(self.base_lr.is_finite() && self.base_lr > 0.0 && self.lr_decay > 0.0) {
            return Err(Error::InvalidArgument(
                "learning rate and decay must be positive".into(),
            ));
        }
        if !self.j.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coupling {} is not finite",
                self.j
            )));
        }
        Ok(())
    }
}

/// Stepwise CD_k driver mirroring [`crate::training::Trainer`].
pub struct RbmTrainer<'a> {
    config: RbmTrainingConfig,
    dataset: &'a Dataset,
    gs: Option<&'a GroundState>,
    chain: XyChain,
    e_ref: f64,
    params: RbmParameters,
    epoch: usize,
    order: Vec<usize>,
    shuffle_rng: Rng,
    chain_rng: Rng,
    eval_rng: Rng,
    started: Instant,
}

impl<'a> RbmTrainer<'a> {
    pub fn new(
        config: RbmTrainingConfig,
        dataset: &'a Dataset,
        gs: Option<&'a GroundState>,
    ) -> Result<Self> {
        config.validate()?;
        let n = dataset.n();
        if let Some(gs) = gs {
            if gs.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "ground state has N = {}, dataset has N = {n}",
                    gs.n()
                )));
            }
        }
        let chain = XyChain::new(n, config.j)?;
        let e_ref = gs.map_or_else(|| free_fermion_energy(n, config.j), |g| g.energy);
        let params = RbmParameters::init(n, config.n_h, &mut rng::stream(config.seed, "init"));
        Ok(Self {
            shuffle_rng: rng::stream(config.seed, "shuffle"),
            chain_rng: rng::stream(config.seed, "gibbs"),
            eval_rng: rng::stream(config.seed, "eval"),
            config,
            dataset,
            gs,
            chain,
            e_ref,
            params,
            epoch: 0,
            order: (0..dataset.len()).collect(),
            started: Instant::now(),
        })
    }

    pub fn config(&self) -> &RbmTrainingConfig {
        &self.config
    }

    pub fn params(&self) -> &RbmParameters {
        &self.params
    }

    pub fn into_params(self) -> RbmParameters {
        self.params
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// One pass over the data in positive batches; every update draws fresh
    /// chain seeds from the data.
    pub fn run_epoch(&mut self) -> Result<()> {
        let lr = self.config.learning_rate(self.epoch);
        self.order.shuffle(&mut self.shuffle_rng);
        let samples = self.dataset.samples();
        for chunk in self.order.chunks(self.config.positive_batch) {
            let pos: Vec<&[u8]> = chunk.iter().map(|&i| samples[i].as_slice()).collect();
            let seeds: Vec<&[u8]> = (0..self.config.negative_batch)
                .map(|_| samples[self.chain_rng.random_range(0..samples.len())].as_slice())
                .collect();
            let gamma = cd_k(
                &self.params,
                &seeds,
                self.config.gibbs_k,
                &mut self.chain_rng,
            )?;
            let g = kl_gradient(&self.params, &pos, &gamma)?;
            self.params.sgd_update(&g, lr)?;
        }
        if !self.params.is_finite() {
            return Err(Error::ConvergenceFailure(format!(
                "RBM parameters diverged in epoch {}",
                self.epoch + 1
            )));
        }
        self.epoch += 1;
        Ok(())
    }

    /// Metrics from `eval_samples` Gibbs chains of length `gibbs_k` seeded
    /// from the data. Exact NLL and infidelity are added when `N` permits
    /// enumeration.
    pub fn evaluate(&mut self) -> Result<MetricsRecord> {
        let samples = self.dataset.samples();
        let seeds: Vec<&[u8]> = (0..self.config.eval_samples)
            .map(|_| samples[self.eval_rng.random_range(0..samples.len())].as_slice())
            .collect();
        let drawn = cd_k(
            &self.params,
            &seeds,
            self.config.gibbs_k,
            &mut self.eval_rng,
        )?;
        let estimate = energy_estimate(
            &RbmWavefunction::unnormalized(&self.params),
            &drawn,
            &self.chain,
        )?;
        let n = self.chain.n;
        let enumerable = n <= MAX_LOG_PARTITION_N.min(MAX_GROUND_STATE_N);
        let nll_train = if enumerable {
            Some(rbm_nll(&self.params, self.dataset)?)
        } else {
            None
        };
        let infidelity = match self.gs {
            Some(gs) if enumerable => {
                let psi = RbmWavefunction::normalized(&self.params)?;
                Some((1.0 - fidelity(gs, &psi)?).max(0.0))
            }
            _ => None,
        };
        Ok(MetricsRecord {
            epoch: self.epoch,
            nll_train,
            energy: estimate.mean,
            energy_stderr: estimate.stderr,
            epsilon: energy_difference(estimate.mean, self.e_ref, n),
            infidelity,
            frac_out_of_sector: sector_fraction(&drawn)?,
            wall_seconds: self
                .config
                .record_time
                .then(|| self.started.elapsed().as_secs_f64()),
        })
    }
}

/// Runs `config.epochs` epochs of CD_k training with the same reporting
/// schedule as the recurrent model.
pub fn rbm_train(
    config: RbmTrainingConfig,
    dataset: &Dataset,
    gs: Option<&GroundState>,
    sink: &mut dyn TrainingSink<RbmParameters>,
) -> Result<RbmParameters> {
    let mut trainer = RbmTrainer::new(config, dataset, gs)?;
    sink.checkpoint(0, trainer.params())?;
    let (epochs, eval_every, ckpt_every) = (
        trainer.config.epochs,
        trainer.config.eval_every,
        trainer.config.checkpoint_every,
    );
    while trainer.epoch() < epochs {
        trainer.run_epoch()?;
        let e = trainer.epoch();
        if e % eval_every == 0 || e == epochs {
            let m = trainer.evaluate()?;
            sink.record(&m)?;
        }
        if e % ckpt_every == 0 || e == epochs {
            sink.checkpoint(e, trainer.params())?;
        }
    }
    Ok(trainer.into_params())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbmCheckpoint {
    pub format_version: u32,
    pub n: usize,
    pub n_h: usize,
    pub seed: u64,
    pub epoch: usize,
    /// `W` row-major (`N × n_h`), `b`, `c`.
    pub params: BTreeMap<String, Vec<f64>>,
}

impl RbmCheckpoint {
    pub fn new(params: &RbmParameters, seed: u64, epoch: usize) -> Self {
        let mut map = BTreeMap::new();
        map.insert("W".to_string(), params.w.iter().copied().collect());
        map.insert("b".to_string(), params.b.to_vec());
        map.insert("c".to_string(), params.c.to_vec());
        Self {
            format_version: RBM_FORMAT_VERSION,
            n: params.n(),
            n_h: params.n_h(),
            seed,
            epoch,
            params: map,
        }
    }

    pub fn parameters(&self) -> Result<RbmParameters> {
        if self.format_version != RBM_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported RBM format version {}",
                self.format_version
            )));
        }
        let get = |name: &str, len: usize| -> Result<Vec<f64>> {
            let v = self
                .params
                .get(name)
                .ok_or_else(|| Error::Parse(format!("RBM checkpoint lacks {name}")))?;
            if v.len() != len {
                return Err(Error::Parse(format!(
                    "{name} has {} values, expected {len}",
                    v.len()
                )));
            }
            Ok(v.clone())
        };
        if self.params.len() != 3 {
            return Err(Error::Parse(
                "RBM checkpoint must hold exactly W, b and c".into(),
            ));
        }
        let p = RbmParameters {
            w: Array2::from_shape_vec((self.n, self.n_h), get("W", self.n * self.n_h)?)
                .expect("sized"),
            b: Array1::from(get("b", self.n)?),
            c: Array1::from(get("c", self.n_h)?),
        };
        if !p.is_finite() {
            return Err(Error::Parse(
                "RBM checkpoint holds non-finite values".into(),
            ));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ground_state, sample_dataset};
    use crate::training::central_difference;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn random_rbm(n: usize, n_h: usize, scale: f64, seed: u64) -> RbmParameters {
        let mut r = rng::stream(seed, "rbm-test");
        let p = RbmParameters::zeros(n, n_h);
        let flat: Vec<f64> = (0..p.flatten().len())
            .map(|_| r.random_range(-scale..scale))
            .collect();
        p.with_flat(&flat).unwrap()
    }

    /// Joint energy `-σᵀb - hᵀc - σᵀW h` summed over all hidden states.
    fn brute_force_energy(p: &RbmParameters, config: &[u8]) -> f64 {
        let sigma: Vec<f64> = config.iter().map(|&s| f64::from(s)).collect();
        let total: f64 = spin::all_configs(p.n_h())
            .map(|h| {
                let mut e = 0.0;
                for (i, &s) in sigma.iter().enumerate() {
                    e -= s * p.b[i];
                    for (j, &hj) in h.iter().enumerate() {
                        e -= s * p.w[[i, j]] * f64::from(hj);
                    }
                }
                for (j, &hj) in h.iter().enumerate() {
                    e -= f64::from(hj) * p.c[j];
                }
                (-e).exp()
            })
            .sum();
        -total.ln()
    }

    #[test]
    fn zero_parameters_energy() {
        let p = RbmParameters::zeros(4, 7);
        for c in spin::all_configs(4) {
            assert_abs_diff_eq!(
                effective_energy(&p, &c).unwrap(),
                -7.0 * 2f64.ln(),
                epsilon = 1e-14
            );
        }
        let mut p = RbmParameters::zeros(3, 5);
        p.b.fill(1.0);
        assert_abs_diff_eq!(
            effective_energy(&p, &[1, 1, 1]).unwrap(),
            -3.0 - 5.0 * 2f64.ln(),
            epsilon = 1e-14
        );
        assert!(effective_energy(&p, &[1, 1]).is_err());
    }

    proptest! {
        #[test]
        fn marginalisation_matches_brute_force(seed in 0u64..500, n in 1usize..5, n_h in 1usize..=10) {
            let p = random_rbm(n, n_h, 1.5, seed);
            for c in spin::all_configs(n) {
                let e = effective_energy(&p, &c).unwrap();
                prop_assert!((e - brute_force_energy(&p, &c)).abs() < 1e-10);
            }
        }

        #[test]
        fn enumerated_probabilities_sum_to_one(seed in 0u64..500, n in 1usize..7, n_h in 1usize..8) {
            let p = random_rbm(n, n_h, 1.0, seed);
            let z = exact_partition(&p).unwrap();
            let total: f64 = spin::all_configs(n).map(|c| (-effective_energy(&p, &c).unwrap()).exp() / z).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
            prop_assert!(z > 0.0);
            prop_assert!((log_partition(&p).unwrap() - z.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn partition_hand_values() {
        assert_abs_diff_eq!(
            exact_partition(&RbmParameters::zeros(3, 4)).unwrap(),
            128.0,
            epsilon = 1e-12
        );
        let mut p = RbmParameters::zeros(1, 1);
        p.b[0] = 3f64.ln();
        assert_abs_diff_eq!(exact_partition(&p).unwrap(), 8.0, epsilon = 1e-12);
        assert!(matches!(
            exact_partition(&RbmParameters::zeros(13, 2)),
            Err(Error::SizeLimitExceeded { .. })
        ));
        assert!(exact_partition(&RbmParameters::zeros(2, 13)).is_err());
    }

    #[test]
    fn saturated_and_uniform_sampling() {
        let mut r = rng::stream(5, "t");
        let mut p = RbmParameters::zeros(2, 3);
        p.c[1] = 30.0;
        let mut ones = [0usize; 3];
        for _ in 0..10_000 {
            let h = sample_hidden(&p, &[0, 1], &mut r).unwrap();
            for j in 0..3 {
                ones[j] += h[j] as usize;
            }
        }
        assert_eq!(ones[1], 10_000);
        for j in [0, 2] {
            assert!((ones[j] as f64 - 5000.0).abs() < 3.0 * 50.0);
        }
        p.b[0] = -30.0;
        for _ in 0..100 {
            assert_eq!(sample_visible(&p, &[1, 0, 1], &mut r).unwrap()[0], 0);
        }
    }

    #[test]
    fn conditional_frequencies_match() {
        let p = random_rbm(3, 4, 1.0, 11);
        let mut r = rng::stream(6, "t");
        let config = [1u8, 0, 1];
        let probs = hidden_probabilities(&p, &config).unwrap();
        let draws = 100_000;
        let mut ones = [0usize; 4];
        for _ in 0..draws {
            for (o, h) in ones
                .iter_mut()
                .zip(sample_hidden(&p, &config, &mut r).unwrap())
            {
                *o += h as usize;
            }
        }
        for (o, q) in ones.iter().zip(&probs) {
            let sd = (q * (1.0 - q) / draws as f64).sqrt();
            assert!((*o as f64 / draws as f64 - q).abs() < 3.0 * sd + 1e-12);
        }
        let vp = visible_probabilities(&p, &[1, 1, 0, 0]).unwrap();
        let mut ones = [0usize; 3];
        for _ in 0..draws {
            for (o, s) in ones
                .iter_mut()
                .zip(sample_visible(&p, &[1, 1, 0, 0], &mut r).unwrap())
            {
                *o += s as usize;
            }
        }
        for (o, q) in ones.iter().zip(&vp) {
            let sd = (q * (1.0 - q) / draws as f64).sqrt();
            assert!((*o as f64 / draws as f64 - q).abs() < 3.0 * sd + 1e-12);
        }
    }

    #[test]
    fn zero_parameter_chain_is_uniform() {
        let p = RbmParameters::zeros(3, 4);
        let seeds = vec![vec![0u8, 0, 0]; 20_000];
        let out = cd_k(&p, &seeds, 1, &mut rng::stream(7, "t")).unwrap();
        assert_eq!(out.len(), seeds.len());
        let mut counts = [0usize; 8];
        for c in &out {
            counts[spin::to_bits(c) as usize] += 1;
        }
        let expect = 20_000.0 / 8.0;
        let sd: f64 = 20_000.0 * (1.0 / 8.0) * (7.0 / 8.0);
        for c in counts {
            assert!((c as f64 - expect).abs() < 3.0 * sd.sqrt());
        }
    }

    #[test]
    fn long_chains_equilibrate() {
        let p = random_rbm(2, 3, 0.7, 12);
        let z = exact_partition(&p).unwrap();
        let seeds = vec![vec![0u8, 0]; 20_000];
        let out = cd_k(&p, &seeds, 100, &mut rng::stream(8, "t")).unwrap();
        let mut counts = [0usize; 4];
        for c in &out {
            counts[spin::to_bits(c) as usize] += 1;
        }
        let tv: f64 = spin::all_configs(2)
            .map(|c| {
                let exact = (-effective_energy(&p, &c).unwrap()).exp() / z;
                (counts[spin::to_bits(&c) as usize] as f64 / 20_000.0 - exact).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "tv {tv}");
    }

    #[test]
    fn phase_cancellation_and_plug_in() {
        let p = random_rbm(3, 2, 1.0, 13);
        let batch = vec![vec![0u8, 1, 1], vec![1, 0, 0]];
        let g = kl_gradient(&p, &batch, &batch).unwrap();
        assert!(g.flatten().iter().all(|&x| x == 0.0));

        let z = RbmParameters::zeros(3, 2);
        let g = kl_gradient(&z, &[vec![1u8, 1, 1]], &[vec![0u8, 0, 0]]).unwrap();
        assert!(g.b.iter().all(|&x| x == -1.0));
        assert!(g.c.iter().all(|&x| x == 0.0));
        assert!(g.w.iter().all(|&x| x == -0.5));
    }

    #[test]
    fn exact_gradient_matches_kl_finite_differences() {
        for (n, n_h, seed) in [(2, 2, 1), (4, 3, 2), (4, 6, 3)] {
            let gs = ground_state(&XyChain::new(n, 1.0).unwrap()).unwrap();
            let p = random_rbm(n, n_h, 0.8, seed);
            let analytic = exact_kl_gradient(&p, &gs).unwrap().flatten();
            let kl = |x: &[f64]| exact_kl(&p.with_flat(x).unwrap(), &gs).unwrap();
            let fd = central_difference(kl, &p.flatten(), 1e-5);
            for (a, f) in analytic.iter().zip(&fd) {
                assert!((a - f).abs() < 1e-8, "{a} vs {f}");
            }
        }
    }

    #[test]
    fn exact_descent_lowers_kl() {
        let gs = ground_state(&XyChain::new(2, 1.0).unwrap()).unwrap();
        let mut p = random_rbm(2, 3, 0.5, 4);
        let mut last = exact_kl(&p, &gs).unwrap();
        for _ in 0..200 {
            let g = exact_kl_gradient(&p, &gs).unwrap();
            p.sgd_update(&g, 0.1).unwrap();
            let kl = exact_kl(&p, &gs).unwrap();
            assert!(kl <= last + 1e-15);
            last = kl;
        }
        assert!(last >= 0.0);
    }

    #[test]
    fn amplitude_ratios() {
        let p = RbmParameters::zeros(3, 6);
        assert_abs_diff_eq!(rbm_amplitude(&p, &[0, 1, 1]).unwrap(), 8.0, epsilon = 1e-12);
        let p = random_rbm(3, 4, 1.0, 9);
        let (a, b) = ([0u8, 1, 1], [1u8, 0, 1]);
        let ratio = rbm_amplitude(&p, &b).unwrap() / rbm_amplitude(&p, &a).unwrap();
        let expect =
            ((effective_energy(&p, &a).unwrap() - effective_energy(&p, &b).unwrap()) / 2.0).exp();
        assert_abs_diff_eq!(ratio, expect, epsilon = 1e-12);
        let psi = RbmWavefunction::normalized(&p).unwrap();
        let z = exact_partition(&p).unwrap();
        for c in spin::all_configs(3) {
            let prob = (-effective_energy(&p, &c).unwrap()).exp() / z;
            assert_abs_diff_eq!(psi.amplitude(&c).powi(2), prob, epsilon = 1e-12);
        }
    }

    #[test]
    fn per_size_defaults() {
        let c = RbmTrainingConfig::for_chain(2);
        assert_eq!((c.n_h, c.seed), (10, 7777));
        assert_eq!(RbmTrainingConfig::for_chain(4).n_h, 50);
        assert_eq!(RbmTrainingConfig::for_chain(10).seed, 1234);
        assert_eq!(RbmTrainingConfig::for_chain(6).seed, 2222);
        assert_eq!(RbmTrainingConfig::for_chain(16).seed, 1357);
        assert_eq!(
            (c.positive_batch, c.negative_batch, c.gibbs_k),
            (100, 200, 100)
        );
        assert_abs_diff_eq!(c.learning_rate(2), 0.01 * 0.999 * 0.999, epsilon = 1e-18);
    }

    #[test]
    fn checkpoint_round_trip_and_determinism() {
        let gs = ground_state(&XyChain::new(2, 1.0).unwrap()).unwrap();
        let data = sample_dataset(&gs, 300, &mut rng::stream(1, "data")).unwrap();
        let config = RbmTrainingConfig {
            epochs: 3,
            eval_every: 1,
            eval_samples: 50,
            gibbs_k: 5,
            ..RbmTrainingConfig::for_chain(2)
        };
        let run = || {
            let mut m = Vec::new();
            let p = rbm_train(config.clone(), &data, Some(&gs), &mut m).unwrap();
            (p, m)
        };
        let (p, m) = run();
        assert_eq!((p.clone(), m.clone()), run());
        assert_eq!(m.len(), 3);
        assert!(m
            .iter()
            .all(|r| r.infidelity.is_some() && r.nll_train.is_some()));
        let ckpt = RbmCheckpoint::new(&p, 7777, 3);
        let back: RbmCheckpoint = serde_json::from_str(&ckpt.to_json().unwrap()).unwrap();
        assert_eq!(back.parameters().unwrap(), p);
    }
}
