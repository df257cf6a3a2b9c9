use std::f64::consts::PI;

/// Open-chain XY ground-state energy at zero field from the Jordan–Wigner
/// free-fermion spectrum `-J cos(π m / (N + 1))`: all negative modes filled.
pub fn free_fermion_energy(n: usize, j: f64) -> f64 {
    (1..=n)
        .map(|m| (PI * m as f64 / (n as f64 + 1.0)).cos())
        .filter(|&c| c > 0.0)
        .map(|c| -j * c)
        .sum()
}
