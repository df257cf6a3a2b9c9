//! Two-dimensional cross-sections of the loss, `f(α, β) = L(θ* + αδ + βη)`,
//! and projection of a training trajectory onto the same plane.

use std::io::Write;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub const DEFAULT_GRID_POINTS: usize = 41;
pub const DEFAULT_RANGE: f64 = 1.0;
pub const SURFACE_HEADER: &str = "alpha,beta,loss";
pub const PATH_HEADER: &str = "epoch,alpha,beta,residual_norm";

/// Relative Gram-determinant threshold below which `δ` and `η` count as
/// collinear.
const COLLINEAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapePlane {
    pub theta_star: Vec<f64>,
    pub delta: Vec<f64>,
    pub eta: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub alpha: f64,
    pub beta: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub epoch: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `‖θ_t - θ* - αδ - βη‖`.
    pub residual_norm: f64,
}

/// `points` values evenly spaced over `[-range, range]`. An odd count puts
/// an exact zero in the middle.
pub fn symmetric_grid(points: usize, range: f64) -> Result<Vec<f64>> {
    if points.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "grid needs an odd number of points to contain 0, got {points}"
        )));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid range {range} must be positive"
        )));
    }
    if points == 1 {
        return Ok(vec![0.0]);
    }
    let half = (points - 1) as f64 / 2.0;
    Ok((0..points)
        .map(|i| range * (i as f64 - half) / half)
        .collect())
}

/// Two independent standard-normal vectors of length `len`; `δ` is drawn
/// first.
pub fn random_directions(len: usize, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
    let mut draw = || -> Vec<f64> { (0..len).map(|_| StandardNormal.sample(rng)).collect() };
    let delta = draw();
    let eta = draw();
    (delta, eta)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LandscapePlane {
    pub fn new(
        theta_star: Vec<f64>,
        delta: Vec<f64>,
        eta: Vec<f64>,
        alpha_grid: Vec<f64>,
        beta_grid: Vec<f64>,
    ) -> Result<Self> {
        let len = theta_star.len();
        if delta.len() != len || eta.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "directions of length {} and {} for {len} parameters",
                delta.len(),
                eta.len()
            )));
        }
        for (name, grid) in [("alpha", &alpha_grid), ("beta", &beta_grid)] {
            if !grid.contains(&0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} grid does not contain 0"
                )));
            }
        }
        Ok(Self {
            theta_star,
            delta,
            eta,
            alpha_grid,
            beta_grid,
        })
    }

    /// `θ* + αδ + βη`.
    pub fn point(&self, alpha: f64, beta: f64) -> Vec<f64> {
        self.theta_star
            .iter()
            .zip(&self.delta)
            .zip(&self.eta)
            .map(|((t, d), e)| t + alpha * d + beta * e)
            .collect()
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.theta_star.len() {
            return Err(Error::DimensionMismatch(format!(
                "checkpoint has {} parameters, plane has {}",
                theta.len(),
                self.theta_star.len()
            )));
        }
        Ok(())
    }

    /// Least-squares coordinates of `θ - θ*` in the span of `δ` and `η`,
    /// with the residual norm.
    pub fn project(&self, theta: &[f64]) -> Result<(f64, f64, f64)> {
        self.check_len(theta)?;
        let (dd, ee, de) = (
            dot(&self.delta, &self.delta),
            dot(&self.eta, &self.eta),
            dot(&self.delta, &self.eta),
        );
        let det = dd * ee - de * de;
        if det.is_nan() || det <= COLLINEAR_TOL * dd * ee {
            return Err(Error::DegeneratePlane);
        }
        let r: Vec<f64> = theta
            .iter()
            .zip(&self.theta_star)
            .map(|(t, s)| t - s)
            .collect();
        let (a, b) = (dot(&self.delta, &r), dot(&self.eta, &r));
        let alpha = (ee * a - de * b) / det;
        let beta = (dd * b - de * a) / det;
        let residual = r
            .iter()
            .zip(&self.delta)
            .zip(&self.eta)
            .map(|((r, d), e)| (r - alpha * d - beta * e).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok((alpha, beta, residual))
    }
}

/// Evaluates `loss` at every grid point, `α` outer and `β` inner.
pub fn loss_surface(
    plane: &LandscapePlane,
    mut loss: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<Vec<SurfacePoint>> {
    let mut out = Vec::with_capacity(plane.alpha_grid.len() * plane.beta_grid.len());
    for &alpha in &plane.alpha_grid {
        for &beta in &plane.beta_grid {
            out.push(SurfacePoint {
                alpha,
                beta,
                loss: loss(&plane.point(alpha, beta))?,
            });
        }
    }
    Ok(out)
}

/// Projects `(epoch, θ_epoch)` checkpoints onto the plane.
pub fn project_path(
    checkpoints: &[(usize, Vec<f64>)],
    plane: &LandscapePlane,
) -> Result<Vec<PathPoint>> {
    checkpoints
        .iter()
        .map(|(epoch, theta)| {
            let (alpha, beta, residual_norm) = plane.project(theta)?;
            Ok(PathPoint {
                epoch: *epoch,
                alpha,
                beta,
                residual_norm,
            })
        })
        .collect()
}

pub fn write_surface_csv(points: &[SurfacePoint], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{SURFACE_HEADER}")?;
    for p in points {
        writeln!(out, "{},{},{}", p.alpha, p.beta, p.loss)?;
    }
    Ok(())
}

pub fn write_path_csv(points: &[PathPoint], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{PATH_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            p.epoch, p.alpha, p.beta, p.residual_norm
        )?;
    }
    Ok(())
}
