//! Command options. Every option may come from a flag or from a JSON
//! config file whose keys are the flag names; flags win.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use symrnn::rnn::{CellKind, SymmetryMode};

use crate::error::CliError;

/// Model family selected with `--model`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Rnn,
    U1Rnn,
    Rbm,
}

/// Loads a config file as `T`, rejecting unknown keys.
fn load_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))
}

/// Declares an options struct whose fields are all optional and can be
/// merged with a config file of the same shape.
macro_rules! options {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            /// JSON file with default values for any of these options.
            #[arg(long)]
            #[serde(skip)]
            pub config: Option<PathBuf>,
            $($(#[$fmeta])* #[arg(long)] pub $field: Option<$ty>,)*
        }

        impl $name {
            /// Fills every unset flag from the config file, if one was given.
            pub fn merged(mut self) -> Result<Self, CliError> {
                if let Some(path) = self.config.clone() {
                    let file: $name = load_config(&path)?;
                    $(self.$field = self.$field.or(file.$field);)*
                }
                Ok(self)
            }
        }
    };
}

options! {
    GenDataOptions {
        /// Chain length (even, at most 20).
        n: usize,
        /// Exchange coupling J.
        j: f64,
        /// Number of measurement samples [default: 20000].
        samples: usize,
        /// Seed for the sampling stream [default: 1].
        seed: u64,
        /// Dataset file to write; the ground state goes next to it as `<stem>.gs.json`.
        out: PathBuf,
        /// Explicit path for the ground-state JSON.
        gs_out: PathBuf,
    }
}

options! {
    TrainOptions {
        /// rnn, u1-rnn or rbm.
        #[arg(value_enum)]
        model: ModelKind,
        /// Training dataset.
        data: PathBuf,
        /// Ground-state JSON [default: `<data stem>.gs.json` if present].
        gs: PathBuf,
        /// Output directory for metrics and checkpoints.
        out: PathBuf,
        /// Recurrent cell for RNN models: gru or vanilla [default: gru].
        cell: CellKind,
        /// Overrides the symmetry implied by --model for RNN models (none or u1).
        symmetry: SymmetryMode,
        /// Hidden units d_h (RNN) or n_h (RBM).
        hidden_units: usize,
        /// Learning rate (RNN) or base learning rate (RBM).
        lr: f64,
        /// Mini-batch size for RNN models.
        batch_size: usize,
        /// Training epochs [default: 1000 (RNN), 2000 (RBM)].
        epochs: usize,
        /// Epochs between metrics rows; the final epoch always gets one [default: 10].
        eval_every: usize,
        /// Model samples per evaluation [default: 10000].
        eval_samples: usize,
        /// Seed for initialisation, shuffling and evaluation [default: 1].
        seed: u64,
        /// Coupling used for the energy estimate [default: 1].
        j: f64,
        /// Gibbs sweeps per negative phase (RBM).
        k: usize,
        /// Positive-phase batch size (RBM).
        pos_batch: usize,
        /// Negative-phase batch size (RBM).
        neg_batch: usize,
        /// Epochs between checkpoints [default: 200].
        checkpoint_every: usize,
        /// Fill the `seconds` metrics column (breaks byte-identical reruns).
        #[arg(num_args = 0..=1, default_missing_value = "true")]
        record_time: bool,
    }
}

options! {
    EvalOptions {
        /// Checkpoint of either model family.
        checkpoint: PathBuf,
        /// Dataset for the NLL column (and RBM chain seeds).
        data: PathBuf,
        /// Ground-state JSON for ε and infidelity.
        gs: PathBuf,
        /// Number of model samples [default: 10000].
        samples: usize,
        /// Seed for sampling [default: 1].
        seed: u64,
        /// Coupling [default: 1].
        j: f64,
        /// Gibbs sweeps per RBM sample [default: 100].
        k: usize,
        /// Comma-separated metrics that must be available: energy, epsilon, infidelity, nll, frac.
        metrics: String,
    }
}

options! {
    LandscapeOptions {
        /// Directory holding `ckpt_<epoch>.json` files of one RNN run.
        checkpoint_dir: PathBuf,
        /// Dataset the loss is evaluated on (the training set).
        data: PathBuf,
        /// Grid points per axis, odd [default: 41].
        grid: usize,
        /// Half-width of the α and β ranges [default: 1].
        range: f64,
        /// Seed for the random directions [default: 1].
        seed: u64,
        /// Output directory for surface.csv and path.csv.
        out: PathBuf,
    }
}

options! {
    SampleOptions {
        /// Checkpoint of either model family.
        checkpoint: PathBuf,
        /// Number of samples [default: 10000].
        samples: usize,
        /// Seed for sampling [default: 1].
        seed: u64,
        /// Gibbs sweeps per RBM sample [default: 100].
        k: usize,
        /// Dataset file to write.
        out: PathBuf,
    }
}

/// Unwraps a required option.
pub fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}
