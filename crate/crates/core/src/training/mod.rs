//! Maximum-likelihood training of the recurrent wavefunction on projective
//! measurements.

mod gradient;

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use gradient::{
    central_difference, finite_diff_gradient, nll, nll_and_gradient, nll_gradient,
    richardson_gradient, sgd_step, sgd_update,
};

use crate::error::{Error, Result};
use crate::exact::{fidelity, free_fermion_energy, Dataset, GroundState, XyChain};
use crate::metrics::{MetricsRecord, TrainingSink};
use crate::observables::{energy_difference, energy_estimate, sector_fraction};
use crate::rng::{self, Rng};
use crate::rnn::{self, CellKind, RnnParameters, RnnWavefunction, SymmetryMode};

pub const DEFAULT_CHECKPOINT_EVERY: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub cell: CellKind,
    pub d_h: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub symmetry_mode: SymmetryMode,
    pub eval_every: usize,
    pub eval_samples: usize,
    /// Coupling used for the energy estimate.
    pub j: f64,
    /// Epoch spacing of parameter checkpoints; epoch 0 and the last epoch
    /// are always included.
    pub checkpoint_every: usize,
    /// Fill the wall-clock column of the metrics.
    pub record_time: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            cell: CellKind::Gru,
            d_h: 100,
            seed: 1,
            learning_rate: 0.001,
            batch_size: 50,
            epochs: 1000,
            symmetry_mode: SymmetryMode::None,
            eval_every: 10,
            eval_samples: 10_000,
            j: 1.0,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            record_time: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning rate {} must be positive",
                self.learning_rate
            ));
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if self.eval_samples == 0 {
            return bad("eval samples must be at least 1".into());
        }
        if self.eval_every == 0 {
            return bad("eval_every must be at least 1".into());
        }
        if self.checkpoint_every == 0 {
            return bad("checkpoint_every must be at least 1".into());
        }
        if self.d_h == 0 {
            return bad("hidden units must be at least 1".into());
        }
        if !self.j.is_finite() {
            return bad(format!("coupling {} is not finite", self.j));
        }
        Ok(())
    }
}

/// Mean NLL over a whole dataset, evaluated in fixed chunks.
pub fn dataset_nll(params: &RnnParameters, dataset: &Dataset, mode: SymmetryMode) -> Result<f64> {
    nll(params, dataset.samples(), mode)
}

/// Stepwise SGD driver. Each call to [`Trainer::run_epoch`] performs one
/// pass over a freshly shuffled copy of the dataset.
pub struct Trainer<'a> {
    config: TrainingConfig,
    dataset: &'a Dataset,
    gs: Option<&'a GroundState>,
    chain: XyChain,
    e_ref: f64,
    params: RnnParameters,
    epoch: usize,
    order: Vec<usize>,
    shuffle_rng: Rng,
    eval_rng: Rng,
    started: Instant,
}

impl<'a> Trainer<'a> {
    pub fn new(
        config: TrainingConfig,
        dataset: &'a Dataset,
        gs: Option<&'a GroundState>,
    ) -> Result<Self> {
        config.validate()?;
        let n = dataset.n();
        config.symmetry_mode.check_sites(n)?;
        if let Some(gs) = gs {
            if gs.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "ground state has N = {}, dataset has N = {n}",
                    gs.n()
                )));
            }
        }
        // Reject out-of-sector data before any update.
        dataset_nll(
            &RnnParameters::zeros(config.cell, 1),
            dataset,
            config.symmetry_mode,
        )?;
        let chain = XyChain::new(n, config.j)?;
        let e_ref = gs.map_or_else(|| free_fermion_energy(n, config.j), |g| g.energy);
        let params = RnnParameters::init(
            config.cell,
            config.d_h,
            &mut rng::stream(config.seed, "init"),
        );
        Ok(Self {
            shuffle_rng: rng::stream(config.seed, "shuffle"),
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

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn params(&self) -> &RnnParameters {
        &self.params
    }

    pub fn into_params(self) -> RnnParameters {
        self.params
    }

    /// Completed epochs.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// One pass over the data; the final batch may be shorter than
    /// `batch_size`.
    pub fn run_epoch(&mut self) -> Result<()> {
        self.order.shuffle(&mut self.shuffle_rng);
        let samples = self.dataset.samples();
        let mut batch: Vec<&[u8]> = Vec::with_capacity(self.config.batch_size);
        for chunk in self.order.chunks(self.config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| samples[i].as_slice()));
            let grads = nll_gradient(&self.params, &batch, self.config.symmetry_mode)?;
            sgd_update(&mut self.params, &grads, self.config.learning_rate)?;
        }
        if !self.params.is_finite() {
            return Err(Error::ConvergenceFailure(format!(
                "parameters diverged in epoch {}",
                self.epoch + 1
            )));
        }
        self.epoch += 1;
        Ok(())
    }

    /// Metrics of the current parameters from `eval_samples` fresh samples.
    pub fn evaluate(&mut self) -> Result<MetricsRecord> {
        let mode = self.config.symmetry_mode;
        let n = self.chain.n;
        let samples = rnn::sample(
            &self.params,
            n,
            self.config.eval_samples,
            mode,
            &mut self.eval_rng,
        )?;
        let psi = RnnWavefunction::new(&self.params, mode);
        let estimate = energy_estimate(&psi, &samples, &self.chain)?;
        let infidelity = match self.gs {
            Some(gs) => Some((1.0 - fidelity(gs, &psi)?).max(0.0)),
            None => None,
        };
        Ok(MetricsRecord {
            epoch: self.epoch,
            nll_train: Some(dataset_nll(&self.params, self.dataset, mode)?),
            energy: estimate.mean,
            energy_stderr: estimate.stderr,
            epsilon: energy_difference(estimate.mean, self.e_ref, n),
            infidelity,
            frac_out_of_sector: sector_fraction(&samples)?,
            wall_seconds: self
                .config
                .record_time
                .then(|| self.started.elapsed().as_secs_f64()),
        })
    }

    fn checkpoint_due(&self) -> bool {
        self.epoch.is_multiple_of(self.config.checkpoint_every) || self.epoch == self.config.epochs
    }
}

/// Runs `config.epochs` epochs, reporting metrics every `eval_every` epochs
/// and after the last one, and checkpoints on the fixed schedule.
pub fn train(
    config: TrainingConfig,
    dataset: &Dataset,
    gs: Option<&GroundState>,
    sink: &mut dyn TrainingSink<RnnParameters>,
) -> Result<RnnParameters> {
    let mut trainer = Trainer::new(config, dataset, gs)?;
    sink.checkpoint(0, trainer.params())?;
    while trainer.epoch() < trainer.config.epochs {
        trainer.run_epoch()?;
        if trainer.epoch() % trainer.config.eval_every == 0
            || trainer.epoch() == trainer.config.epochs
        {
            let m = trainer.evaluate()?;
            sink.record(&m)?;
        }
        if trainer.checkpoint_due() {
            sink.checkpoint(trainer.epoch(), trainer.params())?;
        }
    }
    Ok(trainer.into_params())
}
