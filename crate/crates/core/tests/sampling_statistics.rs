use std::collections::HashMap;

use symrnn::exact::{ground_state, sample_dataset, XyChain};
use symrnn::observables::{energy_estimate, sector_fraction, summarize};
use symrnn::rng;
use symrnn::rnn::{self, CellKind, RnnParameters, RnnWavefunction, SymmetryMode};
use symrnn::spin;

fn total_variation(samples: &[Vec<u8>], params: &RnnParameters, mode: SymmetryMode) -> f64 {
    let n = samples[0].len();
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for s in samples {
        *counts.entry(spin::to_bits(s)).or_default() += 1;
    }
    let configs: Vec<_> = spin::all_configs(n).collect();
    let lp = rnn::log_probs(params, &configs, mode).unwrap();
    let m = samples.len() as f64;
    0.5 * configs
        .iter()
        .zip(&lp)
        .map(|(c, l)| {
            let empirical = counts.get(&spin::to_bits(c)).copied().unwrap_or(0) as f64 / m;
            (empirical - l.exp()).abs()
        })
        .sum::<f64>()
}

#[test]
fn ancestral_samples_follow_the_enumerated_distribution() {
    for (seed, mode) in [(1, SymmetryMode::None), (2, SymmetryMode::U1)] {
        let mut params = RnnParameters::init(CellKind::Gru, 10, &mut rng::stream(seed, "init"));
        // Sharpen the output layer so the target is far from uniform.
        params.v.mapv_inplace(|x| 8.0 * x);
        let samples = rnn::sample(
            &params,
            4,
            1_000_000,
            mode,
            &mut rng::stream(seed, "sample"),
        )
        .unwrap();
        let tv = total_variation(&samples, &params, mode);
        assert!(tv <= 0.01, "{mode:?}: TV {tv}");
    }
}

#[test]
fn untrained_network_leaks_out_of_the_sector() {
    // Zero output weights make every conditional exactly uniform.
    let mut params = RnnParameters::init(CellKind::Gru, 16, &mut rng::stream(5, "init"));
    params.v.fill(0.0);
    let m = 10_000;
    let samples = rnn::sample(
        &params,
        10,
        m,
        SymmetryMode::None,
        &mut rng::stream(5, "sample"),
    )
    .unwrap();
    let p = 1.0 - 252.0 / 1024.0;
    let sigma = (p * (1.0 - p) / m as f64).sqrt();
    let frac = sector_fraction(&samples).unwrap();
    assert!((frac - p).abs() <= 3.0 * sigma, "{frac} vs {p} ± {sigma}");

    let projected = rnn::sample(
        &params,
        10,
        m,
        SymmetryMode::U1,
        &mut rng::stream(5, "sample"),
    )
    .unwrap();
    assert_eq!(sector_fraction(&projected).unwrap(), 0.0);
}

#[test]
fn stderr_shrinks_as_inverse_square_root() {
    let chain = XyChain::new(8, 1.0).unwrap();
    let params = RnnParameters::init(CellKind::Gru, 12, &mut rng::stream(7, "init"));
    let psi = RnnWavefunction::new(&params, SymmetryMode::U1);
    let samples = rnn::sample(
        &params,
        8,
        64_000,
        SymmetryMode::U1,
        &mut rng::stream(7, "sample"),
    )
    .unwrap();
    let full = energy_estimate(&psi, &samples, &chain).unwrap();
    for k in [4000, 16_000] {
        let sub = energy_estimate(&psi, &samples[..k], &chain).unwrap();
        let expected = full.stderr * (samples.len() as f64 / k as f64).sqrt();
        let ratio = sub.stderr / expected;
        assert!((1.0 / 1.5..=1.5).contains(&ratio), "n={k}: ratio {ratio}");
    }
    assert!(full.stderr > 0.0);
}

#[test]
fn summary_of_constant_values() {
    let s = summarize(&[-1.25; 10]);
    assert_eq!((s.mean, s.stderr, s.n_samples), (-1.25, 0.0, 10));
}

#[test]
fn dataset_sampling_matches_born_probabilities() {
    let gs = ground_state(&XyChain::new(6, 1.0).unwrap()).unwrap();
    let m = 400_000;
    let data = sample_dataset(&gs, m, &mut rng::stream(11, "data")).unwrap();
    let mut counts: HashMap<&[u8], usize> = HashMap::new();
    for s in data.samples() {
        *counts.entry(s.as_slice()).or_default() += 1;
    }
    let tv: f64 = 0.5
        * gs.basis
            .configs()
            .map(|c| {
                let empirical = counts.get(c.as_slice()).copied().unwrap_or(0) as f64 / m as f64;
                (empirical - gs.probability(&c)).abs()
            })
            .sum::<f64>();
    assert!(tv < 0.01, "TV {tv}");
    assert!(data.samples().iter().all(|s| spin::in_zero_sector(s)));
}
