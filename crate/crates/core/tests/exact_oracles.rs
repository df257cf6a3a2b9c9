use nalgebra::{DMatrix, SymmetricEigen};
use symrnn::exact::{
    exact_model_energy, fidelity, free_fermion_energy, ground_state, sample_dataset, XyChain,
};
use symrnn::observables::{energy_estimate, local_energies};
use symrnn::rng;
use symrnn::rnn::{self, CellKind, RnnParameters, RnnWavefunction, SymmetryMode};
use symrnn::spin;

/// `-J Σ (S^x S^x + S^y S^y)` on the full `2^N` space, site 0 as the most
/// significant tensor factor.
fn kronecker_hamiltonian(n: usize, j: f64) -> DMatrix<f64> {
    let sx = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
    // S^y ⊗ S^y is real: (iσ^y/2) ⊗ (iσ^y/2) with a minus sign.
    let isy = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
    let id = DMatrix::<f64>::identity(2, 2);
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for bond in 0..n - 1 {
        let mut xx = DMatrix::from_element(1, 1, 1.0);
        let mut yy = DMatrix::from_element(1, 1, 1.0);
        for site in 0..n {
            let (a, b) = if site == bond || site == bond + 1 {
                (&sx, &isy)
            } else {
                (&id, &id)
            };
            xx = xx.kronecker(a);
            yy = yy.kronecker(b);
        }
        h -= (xx - yy) * j;
    }
    h
}

#[test]
fn sector_matrix_is_the_projected_kronecker_hamiltonian() {
    for n in [2, 4, 6, 8] {
        for j in [1.0, 0.7] {
            let chain = XyChain::new(n, j).unwrap();
            let full = kronecker_hamiltonian(n, j);
            let (basis, sector) = symrnn::exact::sector_problem(&chain).unwrap();
            let dense = sector.to_dense();
            for (a, &sa) in basis.states().iter().enumerate() {
                for (b, &sb) in basis.states().iter().enumerate() {
                    assert_eq!(
                        dense[(a, b)],
                        full[(sa as usize, sb as usize)],
                        "N={n} ({a},{b})"
                    );
                }
            }
            let e_full = SymmetricEigen::new(full).eigenvalues.min();
            let gs = ground_state(&chain).unwrap();
            assert!(
                (gs.energy - e_full).abs() < 1e-10,
                "N={n}: {} vs {e_full}",
                gs.energy
            );
        }
    }
}

#[test]
fn ground_state_is_an_eigenvector_of_the_full_hamiltonian() {
    let n = 8;
    let chain = XyChain::new(n, 1.0).unwrap();
    let gs = ground_state(&chain).unwrap();
    let psi =
        nalgebra::DVector::from_iterator(1 << n, spin::all_configs(n).map(|c| gs.amplitude_of(&c)));
    let residual = kronecker_hamiltonian(n, 1.0) * &psi - &psi * gs.energy;
    assert!(residual.amax() < 1e-10);
    assert!((psi.norm() - 1.0).abs() < 1e-12);
    assert!(psi.iter().all(|&a| a >= 0.0));
}

#[test]
fn exact_ground_state_has_zero_variance_local_energy() {
    for n in (2..=12).step_by(2) {
        let chain = XyChain::new(n, 1.0).unwrap();
        let gs = ground_state(&chain).unwrap();
        let data = sample_dataset(&gs, 2000, &mut rng::stream(n as u64, "data")).unwrap();
        let e = local_energies(&gs, data.samples(), &chain).unwrap();
        let (lo, hi) = e
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        assert!(hi - lo <= 1e-9, "N={n}: spread {}", hi - lo);
        let est = energy_estimate(&gs, data.samples(), &chain).unwrap();
        assert!((est.mean - gs.energy).abs() < 1e-10);
        assert!(est.stderr < 1e-10);
        assert!((gs.energy - free_fermion_energy(n, 1.0)).abs() < 1e-10 * n as f64);
    }
}

/// `Σ_σ |ψ(σ)|² E_loc(σ)` over every configuration the model can emit.
fn weighted_local_energy(params: &RnnParameters, mode: SymmetryMode, chain: &XyChain) -> f64 {
    let configs: Vec<_> = spin::all_configs(chain.n).collect();
    let lp = rnn::log_probs(params, &configs, mode).unwrap();
    let support: Vec<_> = configs
        .iter()
        .zip(&lp)
        .filter(|(_, l)| l.is_finite())
        .map(|(c, _)| c.clone())
        .collect();
    let weights: Vec<f64> = lp
        .iter()
        .filter(|l| l.is_finite())
        .map(|l| l.exp())
        .collect();
    let psi = RnnWavefunction::new(params, mode);
    let e = local_energies(&psi, &support, chain).unwrap();
    weights.iter().zip(&e).map(|(w, e)| w * e).sum()
}

#[test]
fn local_energy_estimator_is_unbiased() {
    for n in [2, 4, 6, 8] {
        let chain = XyChain::new(n, 1.0).unwrap();
        for (k, kind) in [CellKind::Gru, CellKind::Vanilla].into_iter().enumerate() {
            for mode in [SymmetryMode::None, SymmetryMode::U1] {
                let params = RnnParameters::init(
                    kind,
                    6,
                    &mut rng::stream(10 * n as u64 + k as u64, "init"),
                );
                let psi = RnnWavefunction::new(&params, mode);
                let exact = exact_model_energy(&chain, &psi).unwrap();
                let weighted = weighted_local_energy(&params, mode, &chain);
                assert!((exact - weighted).abs() < 1e-10, "N={n} {kind:?} {mode:?}");
            }
        }
    }
}

#[test]
fn uniform_two_site_state() {
    let chain = XyChain::new(2, 1.0).unwrap();
    let uniform = |_: &[u8]| 0.5;
    assert!((exact_model_energy(&chain, &uniform).unwrap() + 0.25).abs() < 1e-15);
}

#[test]
fn fidelity_of_the_ground_state_with_itself() {
    let gs = ground_state(&XyChain::new(10, 1.0).unwrap()).unwrap();
    assert!((fidelity(&gs, &gs).unwrap() - 1.0).abs() < 1e-12);
    let uniform_sector = |c: &[u8]| {
        if spin::in_zero_sector(c) {
            1.0 / (gs.basis.len() as f64).sqrt()
        } else {
            0.0
        }
    };
    let f = fidelity(&gs, &uniform_sector).unwrap();
    assert!(f > 0.0 && f < 1.0);
}

#[test]
fn two_site_dataset_frequencies() {
    let gs = ground_state(&XyChain::new(2, 1.0).unwrap()).unwrap();
    let data = sample_dataset(&gs, 1_000_000, &mut rng::stream(3, "data")).unwrap();
    let hits = data
        .samples()
        .iter()
        .filter(|s| s.as_slice() == [0, 1])
        .count();
    let freq = hits as f64 / data.len() as f64;
    assert!((freq - 0.5).abs() < 0.002, "{freq}");
}
