//! Lowest eigenpair of the sector Hamiltonian.
//!
//! Small sectors are diagonalised densely. Larger ones use Lanczos with
//! full reorthogonalisation and explicit restarts; the gap to the first
//! excited state is found by a second Lanczos run deflated against the
//! ground state.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;

use super::basis::{build_sector_basis, SectorBasis};
use super::hamiltonian::{SectorHamiltonian, XyChain};
use super::GroundState;
use crate::error::{Error, Result};
use crate::rng;

/// Largest chain length handled by [`ground_state`].
pub const MAX_GROUND_STATE_N: usize = 20;
/// Sector dimensions up to this size use dense diagonalisation.
pub const DENSE_LIMIT: usize = 1000;
const MIN_GAP: f64 = 1e-8;
const KRYLOV_DIM: usize = 100;
const MAX_RESTARTS: usize = 60;
const RESIDUAL_TOL: f64 = 1e-12;

pub fn ground_state(chain: &XyChain) -> Result<GroundState> {
    if chain.n > MAX_GROUND_STATE_N {
        return Err(Error::SizeLimitExceeded {
            what: "N",
            value: chain.n,
            limit: MAX_GROUND_STATE_N,
        });
    }
    let basis = build_sector_basis(chain.n)?;
    let h = SectorHamiltonian::new(chain, &basis)?;
    let (e0, e1, mut v) = if basis.len() <= DENSE_LIMIT {
        dense_lowest(&h)
    } else {
        let (e0, v) = lanczos_lowest(&h, &[])?;
        let (e1, _) = lanczos_lowest(&h, &[&v])?;
        (e0, e1, v)
    };
    if e1 - e0 <= MIN_GAP {
        return Err(Error::ConvergenceFailure(format!(
            "sector ground state is not separated from the first excited state (gap {:e})",
            e1 - e0
        )));
    }
    gauge_fix(&mut v)?;
    let mut hv = vec![0.0; v.len()];
    h.apply_into(&v, &mut hv);
    let energy = dot(&v, &hv);
    Ok(GroundState {
        chain: *chain,
        basis,
        amplitudes: v,
        energy,
    })
}

/// Flips the overall sign so the largest component is positive, then clamps
/// round-off negatives to zero and renormalises.
fn gauge_fix(v: &mut [f64]) -> Result<()> {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    if let Some(bad) = v.iter().copied().find(|&x| x < -1e-12) {
        return Err(Error::ConvergenceFailure(format!(
            "ground state is not sign-free (component {bad:e})"
        )));
    }
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(())
}

fn dense_lowest(h: &SectorHamiltonian) -> (f64, f64, Vec<f64>) {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e0 = eig.eigenvalues[order[0]];
    let e1 = order
        .get(1)
        .map(|&k| eig.eigenvalues[k])
        .unwrap_or(f64::INFINITY);
    let v = eig.eigenvectors.column(order[0]).iter().copied().collect();
    (e0, e1, v)
}

fn lanczos_lowest(h: &SectorHamiltonian, deflate: &[&[f64]]) -> Result<(f64, Vec<f64>)> {
    let dim = h.dim();
    let mut start_rng = rng::stream(0, "lanczos-start");
    let mut x: Vec<f64> = (0..dim).map(|_| start_rng.random_range(0.5..1.5)).collect();
    let mut w = vec![0.0; dim];

    for _ in 0..MAX_RESTARTS {
        orthogonalize(&mut x, deflate);
        normalize(&mut x);
        let mut q: Vec<Vec<f64>> = vec![x.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz: Vec<f64>;
        loop {
            let j = q.len() - 1;
            h.apply_into(&q[j], &mut w);
            let a = dot(&q[j], &w);
            alpha.push(a);
            // Two passes of classical Gram–Schmidt against everything so far.
            for _ in 0..2 {
                orthogonalize(&mut w, deflate);
                for qi in &q {
                    let p = dot(qi, &w);
                    axpy(-p, qi, &mut w);
                }
            }
            let b = dot(&w, &w).sqrt();
            let (theta, s) = tridiagonal_lowest(&alpha, &beta);
            let residual = b * s.last().copied().unwrap_or(0.0).abs();
            ritz = s;
            if residual < RESIDUAL_TOL || b < 1e-14 {
                let v = combine(&q, &ritz);
                return Ok((theta, v));
            }
            if q.len() == KRYLOV_DIM.min(dim) {
                break;
            }
            beta.push(b);
            q.push(w.iter().map(|&x| x / b).collect());
        }
        x = combine(&q, &ritz);
    }
    Err(Error::ConvergenceFailure(format!(
        "Lanczos did not converge after {MAX_RESTARTS} restarts"
    )))
}

fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let k = (0..m)
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .unwrap();
    (
        eig.eigenvalues[k],
        eig.eigenvectors.column(k).iter().copied().collect(),
    )
}

fn combine(q: &[Vec<f64>], s: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; q[0].len()];
    for (qi, &si) in q.iter().zip(s) {
        axpy(si, qi, &mut v);
    }
    normalize(&mut v);
    v
}

fn orthogonalize(w: &mut [f64], against: &[&[f64]]) {
    for u in against {
        let p = dot(u, w) / dot(u, u);
        axpy(-p, u, w);
    }
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Basis of the sector plus its Hamiltonian, for callers that need both.
pub fn sector_problem(chain: &XyChain) -> Result<(SectorBasis, SectorHamiltonian)> {
    let basis = build_sector_basis(chain.n)?;
    let h = SectorHamiltonian::new(chain, &basis)?;
    Ok((basis, h))
}
