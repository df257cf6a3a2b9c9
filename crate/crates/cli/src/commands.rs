use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};
use symrnn::exact::{
    fidelity, free_fermion_energy, ground_state, sample_dataset, Dataset, GroundState, XyChain,
};
use symrnn::landscape::{self, LandscapePlane};
use symrnn::metrics::{CsvMetricsWriter, MetricsRecord, TrainingSink, METRICS_HEADER};
use symrnn::observables::{energy_difference, energy_estimate, sector_fraction};
use symrnn::rbm::{self, RbmCheckpoint, RbmParameters, RbmTrainingConfig, RbmWavefunction};
use symrnn::rng;
use symrnn::rnn::{self, RnnCheckpoint, RnnParameters, RnnWavefunction, SymmetryMode};
use symrnn::spin::SpinConfig;
use symrnn::training::{self, dataset_nll, TrainingConfig};

use crate::error::CliError;
use crate::manifest::Manifest;
use crate::options::*;

const DEFAULT_SAMPLES: usize = 20_000;
const DEFAULT_EVAL_SAMPLES: usize = 10_000;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_GIBBS_K: usize = 100;

pub const METRICS_FILE: &str = "metrics.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SURFACE_FILE: &str = "surface.csv";
pub const PATH_FILE: &str = "path.csv";

/// `<stem>.gs.json` next to a dataset file.
pub fn default_gs_path(data: &Path) -> PathBuf {
    data.with_extension("gs.json")
}

pub fn checkpoint_name(epoch: usize) -> String {
    format!("ckpt_{epoch}.json")
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| CliError::io(path, e))?,
    ))
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    Dataset::read(path).map_err(|e| match e {
        symrnn::Error::Io(io) => CliError::io(path, io),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })
}

fn read_gs(path: &Path, n: Option<usize>) -> Result<GroundState, CliError> {
    let gs = GroundState::load(path).map_err(|e| match e {
        symrnn::Error::Io(io) => CliError::io(path, io),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })?;
    if let Some(n) = n {
        if gs.n() != n {
            return Err(CliError::Usage(format!(
                "{} describes N = {}, the data has N = {n}",
                path.display(),
                gs.n()
            )));
        }
    }
    Ok(gs)
}

/// Explicit ground state, or the cache written by `gen-data` next to the data.
fn resolve_gs(explicit: &Option<PathBuf>, data: Option<&Path>) -> Option<PathBuf> {
    explicit
        .clone()
        .or_else(|| data.map(default_gs_path).filter(|p| p.is_file()))
}

fn reject(flags: &[(&str, bool)], model: &str) -> Result<(), CliError> {
    match flags.iter().find(|(_, set)| *set) {
        Some((flag, _)) => Err(CliError::Usage(format!(
            "--{flag} does not apply to {model}"
        ))),
        None => Ok(()),
    }
}

pub fn gen_data(opts: GenDataOptions) -> Result<(), CliError> {
    let opts = opts.merged()?;
    let n = required(&opts.n, "n")?;
    let out = required(&opts.out, "out")?;
    let j = opts.j.unwrap_or(1.0);
    let samples = opts.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = opts.seed.unwrap_or(DEFAULT_SEED);
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let chain = XyChain::new(n, j)?;
    let gs = ground_state(&chain)?;
    let data = sample_dataset(&gs, samples, &mut rng::stream(seed, "data"))?;
    let gs_out = opts.gs_out.clone().unwrap_or_else(|| default_gs_path(&out));
    data.write(&out).map_err(|e| annotate(e, &out))?;
    gs.save(&gs_out).map_err(|e| annotate(e, &gs_out))?;
    Manifest::new(
        "gen-data",
        &opts,
        json!({ "n": n, "j": j, "samples": samples, "seed": seed }),
    )
    .output(&out)?
    .output(&gs_out)?
    .write(&out.with_extension("manifest.json"))?;
    println!(
        "N = {n}, J = {j}: sector dimension {}, ground-state energy {}",
        gs.basis.len(),
        gs.energy
    );
    println!(
        "wrote {samples} samples to {} and the ground state to {}",
        out.display(),
        gs_out.display()
    );
    Ok(())
}

fn annotate(e: symrnn::Error, path: &Path) -> CliError {
    match e {
        symrnn::Error::Io(io) => CliError::io(path, io),
        other => other.into(),
    }
}

/// Writes metrics rows and scheduled checkpoints into an output directory.
struct DirSink {
    dir: PathBuf,
    metrics: CsvMetricsWriter<BufWriter<File>>,
    last: Option<MetricsRecord>,
    rnn_meta: Option<(usize, SymmetryMode)>,
    seed: u64,
    written: Vec<PathBuf>,
}

impl DirSink {
    fn new(
        dir: &Path,
        seed: u64,
        rnn_meta: Option<(usize, SymmetryMode)>,
    ) -> Result<Self, CliError> {
        let path = dir.join(METRICS_FILE);
        Ok(Self {
            dir: dir.to_path_buf(),
            metrics: CsvMetricsWriter::new(create_file(&path)?)?,
            last: None,
            rnn_meta,
            seed,
            written: vec![path],
        })
    }

    fn record_row(&mut self, m: &MetricsRecord) -> symrnn::Result<()> {
        self.metrics.write(m)?;
        self.last = Some(m.clone());
        Ok(())
    }
}

impl TrainingSink<RnnParameters> for DirSink {
    fn record(&mut self, m: &MetricsRecord) -> symrnn::Result<()> {
        self.record_row(m)
    }

    fn checkpoint(&mut self, epoch: usize, params: &RnnParameters) -> symrnn::Result<()> {
        let (n, mode) = self.rnn_meta.expect("RNN sink");
        let path = self.dir.join(checkpoint_name(epoch));
        RnnCheckpoint::new(params, n, mode, epoch, self.seed).save(&path)?;
        self.written.push(path);
        Ok(())
    }
}

impl TrainingSink<RbmParameters> for DirSink {
    fn record(&mut self, m: &MetricsRecord) -> symrnn::Result<()> {
        self.record_row(m)
    }

    fn checkpoint(&mut self, epoch: usize, params: &RbmParameters) -> symrnn::Result<()> {
        let path = self.dir.join(checkpoint_name(epoch));
        RbmCheckpoint::new(params, self.seed, epoch).save(&path)?;
        self.written.push(path);
        Ok(())
    }
}

pub fn train(opts: TrainOptions) -> Result<(), CliError> {
    let opts = opts.merged()?;
    let model = required(&opts.model, "model")?;
    let data_path = required(&opts.data, "data")?;
    let out = required(&opts.out, "out")?;
    let data = read_dataset(&data_path)?;
    let n = data.n();
    let gs_path = resolve_gs(&opts.gs, Some(&data_path));
    let gs = gs_path
        .as_deref()
        .map(|p| read_gs(p, Some(n)))
        .transpose()?;

    let (effective, seed) = match model {
        ModelKind::Rnn | ModelKind::U1Rnn => {
            reject(
                &[
                    ("k", opts.k.is_some()),
                    ("pos-batch", opts.pos_batch.is_some()),
                    ("neg-batch", opts.neg_batch.is_some()),
                ],
                "RNN models",
            )?;
            let implied = if model == ModelKind::U1Rnn {
                SymmetryMode::U1
            } else {
                SymmetryMode::None
            };
            let d = TrainingConfig::default();
            let config = TrainingConfig {
                cell: opts.cell.unwrap_or(d.cell),
                d_h: opts.hidden_units.unwrap_or(d.d_h),
                seed: opts.seed.unwrap_or(d.seed),
                learning_rate: opts.lr.unwrap_or(d.learning_rate),
                batch_size: opts.batch_size.unwrap_or(d.batch_size),
                epochs: opts.epochs.unwrap_or(d.epochs),
                symmetry_mode: opts.symmetry.unwrap_or(implied),
                eval_every: opts.eval_every.unwrap_or(d.eval_every),
                eval_samples: opts.eval_samples.unwrap_or(d.eval_samples),
                j: opts.j.unwrap_or(d.j),
                checkpoint_every: opts.checkpoint_every.unwrap_or(d.checkpoint_every),
                record_time: opts.record_time.unwrap_or(false),
            };
            config.validate()?;
            config.symmetry_mode.check_sites(n)?;
            (
                serde_json::to_value(&config).expect("serialisable"),
                config.seed,
            )
        }
        ModelKind::Rbm => {
            reject(
                &[
                    ("cell", opts.cell.is_some()),
                    ("symmetry", opts.symmetry.is_some()),
                    ("batch-size", opts.batch_size.is_some()),
                ],
                "rbm",
            )?;
            let d = RbmTrainingConfig::for_chain(n);
            let config = RbmTrainingConfig {
                n_h: opts.hidden_units.unwrap_or(d.n_h),
                seed: opts.seed.unwrap_or(d.seed),
                base_lr: opts.lr.unwrap_or(d.base_lr),
                positive_batch: opts.pos_batch.unwrap_or(d.positive_batch),
                negative_batch: opts.neg_batch.unwrap_or(d.negative_batch),
                gibbs_k: opts.k.unwrap_or(d.gibbs_k),
                epochs: opts.epochs.unwrap_or(d.epochs),
                eval_every: opts.eval_every.unwrap_or(d.eval_every),
                eval_samples: opts.eval_samples.unwrap_or(d.eval_samples),
                j: opts.j.unwrap_or(d.j),
                checkpoint_every: opts.checkpoint_every.unwrap_or(d.checkpoint_every),
                record_time: opts.record_time.unwrap_or(false),
                ..d
            };
            config.validate()?;
            (
                serde_json::to_value(&config).expect("serialisable"),
                config.seed,
            )
        }
    };

    create_dir(&out)?;
    let result = match model {
        ModelKind::Rbm => {
            let config: RbmTrainingConfig =
                serde_json::from_value(effective.clone()).expect("round trip");
            let mut sink = DirSink::new(&out, seed, None)?;
            rbm::rbm_train(config, &data, gs.as_ref(), &mut sink).map(|_| sink)
        }
        _ => {
            let config: TrainingConfig =
                serde_json::from_value(effective.clone()).expect("round trip");
            let mut sink = DirSink::new(&out, seed, Some((n, config.symmetry_mode)))?;
            training::train(config, &data, gs.as_ref(), &mut sink).map(|_| sink)
        }
    };
    let sink = result.map_err(|e| match e {
        symrnn::Error::SymmetryViolatedSample { index } => CliError::SymmetryViolation {
            line: data.source_line(index).unwrap_or(index + 1),
            path: data_path.display().to_string(),
        },
        other => other.into(),
    })?;

    let mut manifest = Manifest::new(
        "train",
        &opts,
        json!({ "model": model, "n": n, "training": effective }),
    )
    .input(&data_path)?;
    if let Some(p) = &gs_path {
        manifest = manifest.input(p)?;
    }
    for p in &sink.written {
        manifest = manifest.output(p)?;
    }
    manifest.write(&out.join(MANIFEST_FILE))?;
    if let Some(m) = &sink.last {
        println!("{METRICS_HEADER}\n{}", m.csv_row());
    }
    println!("outputs in {}", out.display());
    Ok(())
}

/// A checkpoint of either model family, told apart by the RNN-only
/// `cell_kind` field.
pub enum Checkpoint {
    Rnn(RnnCheckpoint),
    Rbm(RbmCheckpoint),
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let parse_err = |e: serde_json::Error| CliError::Usage(format!("{}: {e}", path.display()));
        let value: Value = serde_json::from_str(&text).map_err(parse_err)?;
        let ckpt = if value.get("cell_kind").is_some() {
            Checkpoint::Rnn(RnnCheckpoint::deserialize(&value).map_err(parse_err)?)
        } else {
            Checkpoint::Rbm(RbmCheckpoint::deserialize(&value).map_err(parse_err)?)
        };
        // Validate the tensors up front.
        match &ckpt {
            Checkpoint::Rnn(c) => {
                c.parameters()
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                c.symmetry_mode.check_sites(c.n)?;
            }
            Checkpoint::Rbm(c) => {
                c.parameters()
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(ckpt)
    }

    pub fn n(&self) -> usize {
        match self {
            Checkpoint::Rnn(c) => c.n,
            Checkpoint::Rbm(c) => c.n,
        }
    }
}

/// Gibbs chains of `k` sweeps from uniformly random starting configurations
/// or, when given, from random data samples.
fn rbm_samples(
    params: &RbmParameters,
    count: usize,
    k: usize,
    seeds_from: Option<&Dataset>,
    rng: &mut rng::Rng,
) -> Result<Vec<SpinConfig>, CliError> {
    use rand::Rng as _;
    let n = params.n();
    let starts: Vec<SpinConfig> = (0..count)
        .map(|_| match seeds_from {
            Some(d) => d.samples()[rng.random_range(0..d.len())].clone(),
            None => (0..n).map(|_| rng.random_range(0..2u8)).collect(),
        })
        .collect();
    Ok(rbm::cd_k(params, &starts, k, rng)?)
}

const METRIC_NAMES: [&str; 5] = ["energy", "epsilon", "infidelity", "nll", "frac"];

pub fn eval(opts: EvalOptions) -> Result<(), CliError> {
    let opts = opts.merged()?;
    let ckpt_path = required(&opts.checkpoint, "checkpoint")?;
    let ckpt = Checkpoint::load(&ckpt_path)?;
    let n = ckpt.n();
    let samples = opts.samples.unwrap_or(DEFAULT_EVAL_SAMPLES);
    let seed = opts.seed.unwrap_or(DEFAULT_SEED);
    let j = opts.j.unwrap_or(1.0);
    let k = opts.k.unwrap_or(DEFAULT_GIBBS_K);
    if samples == 0 || k == 0 {
        return Err(CliError::Usage(
            "--samples and --k must be at least 1".into(),
        ));
    }
    let requested: Vec<String> = match &opts.metrics {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        None => Vec::new(),
    };
    if let Some(bad) = requested
        .iter()
        .find(|m| !METRIC_NAMES.contains(&m.as_str()))
    {
        return Err(CliError::Usage(format!(
            "unknown metric {bad}; choose from {}",
            METRIC_NAMES.join(", ")
        )));
    }
    let data = opts.data.as_deref().map(read_dataset).transpose()?;
    if let Some(d) = &data {
        if d.n() != n {
            return Err(CliError::Usage(format!(
                "data has N = {}, checkpoint has N = {n}",
                d.n()
            )));
        }
    }
    let gs_path = resolve_gs(&opts.gs, opts.data.as_deref());
    let gs = gs_path
        .as_deref()
        .map(|p| read_gs(p, Some(n)))
        .transpose()?;
    let wants = |m: &str| requested.iter().any(|r| r == m);
    if wants("infidelity") && gs.is_none() {
        return Err(CliError::MissingOracle(
            "infidelity needs --gs (or a ground-state cache next to --data)".into(),
        ));
    }
    if wants("nll") && data.is_none() {
        return Err(CliError::MissingOracle("nll needs --data".into()));
    }

    let chain = XyChain::new(n, j)?;
    let e_ref = gs
        .as_ref()
        .map_or_else(|| free_fermion_energy(n, j), |g| g.energy);
    let mut rng = rng::stream(seed, "eval");
    let record = match &ckpt {
        Checkpoint::Rnn(c) => {
            let params = c.parameters()?;
            let mode = c.symmetry_mode;
            let drawn = rnn::sample(&params, n, samples, mode, &mut rng)?;
            let psi = RnnWavefunction::new(&params, mode);
            let est = energy_estimate(&psi, &drawn, &chain)?;
            let nll = match &data {
                Some(d) => Some(dataset_nll(&params, d, mode).map_err(|e| {
                    match e {
                        symrnn::Error::SymmetryViolatedSample { index } => {
                            CliError::SymmetryViolation {
                                line: d.source_line(index).unwrap_or(index + 1),
                                path: opts
                                    .data
                                    .as_ref()
                                    .expect("data given")
                                    .display()
                                    .to_string(),
                            }
                        }
                        other => other.into(),
                    }
                })?),
                None => None,
            };
            let infidelity = gs
                .as_ref()
                .map(|g| fidelity(g, &psi).map(|f| (1.0 - f).max(0.0)))
                .transpose()?;
            MetricsRecord {
                epoch: c.epoch,
                nll_train: nll,
                energy: est.mean,
                energy_stderr: est.stderr,
                epsilon: energy_difference(est.mean, e_ref, n),
                infidelity,
                frac_out_of_sector: sector_fraction(&drawn)?,
                wall_seconds: None,
            }
        }
        Checkpoint::Rbm(c) => {
            let params = c.parameters()?;
            let drawn = rbm_samples(&params, samples, k, data.as_ref(), &mut rng)?;
            let est = energy_estimate(&RbmWavefunction::unnormalized(&params), &drawn, &chain)?;
            let enumerable = n <= rbm::MAX_LOG_PARTITION_N;
            if wants("nll") && !enumerable {
                return Err(CliError::MissingOracle(format!(
                    "RBM nll needs N <= {}",
                    rbm::MAX_LOG_PARTITION_N
                )));
            }
            let nll = match &data {
                Some(d) if enumerable => Some(rbm::rbm_nll(&params, d)?),
                _ => None,
            };
            let infidelity = match &gs {
                Some(g) => {
                    Some((1.0 - fidelity(g, &RbmWavefunction::normalized(&params)?)?).max(0.0))
                }
                None => None,
            };
            MetricsRecord {
                epoch: c.epoch,
                nll_train: nll,
                energy: est.mean,
                energy_stderr: est.stderr,
                epsilon: energy_difference(est.mean, e_ref, n),
                infidelity,
                frac_out_of_sector: sector_fraction(&drawn)?,
                wall_seconds: None,
            }
        }
    };
    println!("{METRICS_HEADER}\n{}", record.csv_row());
    Ok(())
}

pub fn sample(opts: SampleOptions) -> Result<(), CliError> {
    let opts = opts.merged()?;
    let ckpt_path = required(&opts.checkpoint, "checkpoint")?;
    let out = required(&opts.out, "out")?;
    let ckpt = Checkpoint::load(&ckpt_path)?;
    let count = opts.samples.unwrap_or(DEFAULT_EVAL_SAMPLES);
    let seed = opts.seed.unwrap_or(DEFAULT_SEED);
    let k = opts.k.unwrap_or(DEFAULT_GIBBS_K);
    if count == 0 || k == 0 {
        return Err(CliError::Usage(
            "--samples and --k must be at least 1".into(),
        ));
    }
    let mut rng = rng::stream(seed, "sample");
    let drawn = match &ckpt {
        Checkpoint::Rnn(c) => rnn::sample(&c.parameters()?, c.n, count, c.symmetry_mode, &mut rng)?,
        Checkpoint::Rbm(c) => rbm_samples(&c.parameters()?, count, k, None, &mut rng)?,
    };
    Dataset::new(ckpt.n(), drawn)?
        .write(&out)
        .map_err(|e| annotate(e, &out))?;
    Manifest::new(
        "sample",
        &opts,
        json!({ "samples": count, "seed": seed, "k": k }),
    )
    .input(&ckpt_path)?
    .output(&out)?
    .write(&out.with_extension("manifest.json"))?;
    println!("wrote {count} samples to {}", out.display());
    Ok(())
}

/// `(epoch, path)` of every `ckpt_<epoch>.json` in `dir`, by epoch.
pub fn list_checkpoints(dir: &Path) -> Result<Vec<(usize, PathBuf)>, CliError> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let epoch = path
            .file_name()
            .and_then(|f| f.to_str())
            .and_then(|f| f.strip_prefix("ckpt_"))
            .and_then(|f| f.strip_suffix(".json"))
            .and_then(|e| e.parse::<usize>().ok());
        if let Some(epoch) = epoch {
            found.push((epoch, path));
        }
    }
    found.sort();
    Ok(found)
}

pub fn landscape(opts: LandscapeOptions) -> Result<(), CliError> {
    let opts = opts.merged()?;
    let dir = required(&opts.checkpoint_dir, "checkpoint-dir")?;
    let data_path = required(&opts.data, "data")?;
    let out = required(&opts.out, "out")?;
    let grid_points = opts.grid.unwrap_or(landscape::DEFAULT_GRID_POINTS);
    let range = opts.range.unwrap_or(landscape::DEFAULT_RANGE);
    let seed = opts.seed.unwrap_or(DEFAULT_SEED);
    let grid = landscape::symmetric_grid(grid_points, range)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let found = list_checkpoints(&dir)?;
    if found.len() < 2 {
        return Err(CliError::Usage(format!(
            "{} needs a final checkpoint and at least one earlier one",
            dir.display()
        )));
    }
    let mut path_points = Vec::with_capacity(found.len());
    let mut final_ckpt = None;
    for (epoch, path) in &found {
        let ckpt = match Checkpoint::load(path)? {
            Checkpoint::Rnn(c) => c,
            Checkpoint::Rbm(_) => {
                return Err(CliError::Usage(format!(
                    "{}: landscapes are defined for RNN checkpoints",
                    path.display()
                )))
            }
        };
        if let Some(first) = &final_ckpt {
            let first: &RnnCheckpoint = first;
            if (first.cell_kind, first.d_h, first.n, first.symmetry_mode)
                != (ckpt.cell_kind, ckpt.d_h, ckpt.n, ckpt.symmetry_mode)
            {
                return Err(CliError::Usage(format!(
                    "{} belongs to a different model",
                    path.display()
                )));
            }
        }
        path_points.push((*epoch, ckpt.parameters()?.flatten()));
        final_ckpt = Some(ckpt);
    }
    let final_ckpt = final_ckpt.expect("at least two checkpoints");
    let params = final_ckpt.parameters()?;
    let mode = final_ckpt.symmetry_mode;
    let data = read_dataset(&data_path)?;
    if data.n() != final_ckpt.n {
        return Err(CliError::Usage(format!(
            "data has N = {}, checkpoints have N = {}",
            data.n(),
            final_ckpt.n
        )));
    }
    let theta_star = params.flatten();
    let (delta, eta) =
        landscape::random_directions(theta_star.len(), &mut rng::stream(seed, "landscape"));
    let plane = LandscapePlane::new(theta_star, delta, eta, grid.clone(), grid)?;
    let path = landscape::project_path(&path_points, &plane)?;
    let surface = landscape::loss_surface(&plane, |theta| {
        dataset_nll(&params.with_flat(theta)?, &data, mode)
    })?;

    create_dir(&out)?;
    let surface_path = out.join(SURFACE_FILE);
    let path_path = out.join(PATH_FILE);
    let mut w = create_file(&surface_path)?;
    landscape::write_surface_csv(&surface, &mut w)?;
    w.flush().map_err(|e| CliError::io(&surface_path, e))?;
    let mut w = create_file(&path_path)?;
    landscape::write_path_csv(&path, &mut w)?;
    w.flush().map_err(|e| CliError::io(&path_path, e))?;

    let mut manifest = Manifest::new(
        "landscape",
        &opts,
        json!({
            "grid": grid_points,
            "range": range,
            "seed": seed,
            "evaluation_set": "training",
            "final_epoch": final_ckpt.epoch,
        }),
    )
    .input(&data_path)?;
    for (_, p) in &found {
        manifest = manifest.input(p)?;
    }
    manifest
        .output(&surface_path)?
        .output(&path_path)?
        .write(&out.join(MANIFEST_FILE))?;
    let centre = surface
        .iter()
        .find(|p| p.alpha == 0.0 && p.beta == 0.0)
        .expect("grid contains 0");
    println!(
        "f(0,0) = {} at epoch {}; {} path points",
        centre.loss,
        final_ckpt.epoch,
        path.len()
    );
    Ok(())
}
