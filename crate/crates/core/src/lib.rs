//! Reconstruction of the ground state of the open spin-1/2 XY chain from
//! projective measurements with recurrent neural networks, optionally
//! constrained to the zero-magnetisation sector, plus an RBM baseline.

pub mod error;
pub mod exact;
pub mod landscape;
pub mod metrics;
pub mod observables;
pub mod rbm;
pub mod rng;
pub mod rnn;
pub mod spin;
pub mod training;
pub mod wavefunction;

pub use error::{Error, Result};
